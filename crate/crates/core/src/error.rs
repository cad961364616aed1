use thiserror::Error;

use crate::linops::Field;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field mismatch: {0:?} vs {1:?}")]
    FieldMismatch(Field, Field),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid matrix data: {0}")]
    InvalidData(String),

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("mode count {0} out of range (1..=10)")]
    ModeCountOutOfRange(usize),

    #[error("mode {mode} out of range for {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("empty mode subset")]
    EmptySubset,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("expected {expected} modes, got {got}")]
    WrongModeCount { expected: usize, got: usize },

    #[error("group element {0} is not unitary")]
    NotUnitary(usize),

    #[error("group is not closed under multiplication")]
    NotClosed,

    #[error("unsupported subsystem dimensions {0:?}")]
    UnsupportedDims(Vec<usize>),

    #[error("degenerate generator set (rank 0)")]
    DegenerateGenerators,

    #[error("model is not locally tomographic")]
    NotLocallyTomographic,

    #[error("holistic subspace is empty")]
    HolisticEmpty,

    #[error("no valid witness found on the scaling grid")]
    NoWitness,
}

pub type Result<T> = std::result::Result<T, Error>;
