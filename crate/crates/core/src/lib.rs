//! Machine checks for fermionic parity superselection, operational
//! independence versus independent preparation, and local tomography in
//! generalized probabilistic theories.
//!
//! Modules, bottom-up:
//!
//! * [`linops`]: dense real/complex operators, partial traces, spectra.
//! * [`fermion`]: Jordan-Wigner mode operators, parity, CAR checks.
//! * [`independence`]: twirling and the independence/separability tests.
//! * [`gpt`]: bipartite GPT instances, holistic subspaces, witnesses.
//! * [`report`]: the pass/fail record every check emits.

pub mod error;
pub mod fermion;
pub mod gpt;
pub mod independence;
pub mod linops;
pub mod random;
pub mod report;

pub use error::{Error, Result};
pub use fermion::{EffectBasis, FockVector, ModeSet, ModeSystem};
pub use gpt::{CompositeModel, GptSystem, InstanceKind, SubspaceBasis, SubspaceLabel};
pub use independence::{IndependenceVerdict, OperationalIndependence, TwirlGroup};
pub use linops::{Effect, Field, Matrix, QuantumState, Scalar, DEFAULT_TOL, EXACT_TOL};
pub use report::{Check, Report};
