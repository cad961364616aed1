//! Bipartite generalized probabilistic theories on finite-dimensional real
//! vector spaces.
//!
//! States and effects are coordinate vectors. The three built-in instances
//! are realized by operators: each system carries a Hilbert-Schmidt
//! orthonormal frame of Hermitian matrices, a state `rho` has coordinates
//! `Tr(F_k rho)` and an effect `E` pairs with it through the dot product of
//! coordinates. Composition `(x)` is the Kronecker product read back in the
//! composite frame, so one matrix `compose` serves both states and effects.
//!
//! The composite space splits into the span of product states and its
//! Hilbert-Schmidt orthogonal complement, the holistic subspace. Local
//! effects never see holistic directions; the theory is locally tomographic
//! iff that complement is trivial.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::linops::{herm_eigen, hs_inner, kron_all, pauli, Field, Matrix, PAULI_LABELS};
use crate::random::{random_density, rng};
use crate::report::{Check, Report};

/// Relative singular-value threshold for every rank decision.
pub const RANK_REL_TOL: f64 = 1e-8;

/// Scaling grid for holistic witnesses: `t = k / 256`, `k` in `-256..=256`.
pub const WITNESS_GRID_STEPS: i32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    ComplexQubitPair,
    RealQubitPair,
    FermiTwoModes,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 3] = [
        InstanceKind::ComplexQubitPair,
        InstanceKind::RealQubitPair,
        InstanceKind::FermiTwoModes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::ComplexQubitPair => "complex-qubit-pair",
            InstanceKind::RealQubitPair => "real-qubit-pair",
            InstanceKind::FermiTwoModes => "fermi-two-modes",
        }
    }

    /// Which single-qubit Pauli indices span the local operator space.
    fn local_paulis(self) -> &'static [usize] {
        match self {
            InstanceKind::ComplexQubitPair => &[0, 1, 2, 3],
            InstanceKind::RealQubitPair => &[0, 1, 3],
            InstanceKind::FermiTwoModes => &[0, 3],
        }
    }

    /// Whether the two-qubit Pauli product `P_i (x) P_j` lies in the
    /// composite operator space.
    fn admits_pair(self, i: usize, j: usize) -> bool {
        match self {
            InstanceKind::ComplexQubitPair => true,
            // Real symmetric: an even number of Y factors.
            InstanceKind::RealQubitPair => (usize::from(i == 2) + usize::from(j == 2)) % 2 == 0,
            // Commutes with Z (x) Z: an even number of X/Y factors.
            InstanceKind::FermiTwoModes => {
                (usize::from(i == 1 || i == 2) + usize::from(j == 1 || j == 2)) % 2 == 0
            }
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "complex-qubit-pair" | "complex" => Ok(InstanceKind::ComplexQubitPair),
            "real-qubit-pair" | "real" => Ok(InstanceKind::RealQubitPair),
            "fermi-two-modes" | "fermi" | "fermionic" => Ok(InstanceKind::FermiTwoModes),
            _ => Err(Error::InvalidData(format!("unknown GPT instance '{s}'"))),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn outer_coords(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Coordinates `Tr(F_k m)` of `m` in a Hermitian orthonormal frame.
fn frame_coords(frame: &[Matrix], m: &Matrix) -> Vec<f64> {
    frame.iter().map(|f| hs_inner(f, m).re).collect()
}

fn frame_operator(frame: &[Matrix], coords: &[f64]) -> Matrix {
    let side = frame[0].rows();
    let mut out = Matrix::zeros(side, side);
    for (f, &x) in frame.iter().zip(coords) {
        if x != 0.0 {
            out = &out + &f.scale(x);
        }
    }
    out
}

/// Numerical rank with singular values above `rel_tol * sigma_max`.
fn rank_of(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// A single system: ambient space, generating states and effects, unit effect.
#[derive(Debug, Clone)]
pub struct GptSystem {
    ambient_dim: usize,
    state_generators: Vec<Vec<f64>>,
    effect_generators: Vec<Vec<f64>>,
    effect_labels: Vec<String>,
    unit_effect: Vec<f64>,
    frame: Option<Vec<Matrix>>,
}

impl GptSystem {
    /// Abstract system; checks `u(w) = 1` and `e(w)` in `[0, 1]` on generators.
    pub fn new(
        ambient_dim: usize,
        state_generators: Vec<Vec<f64>>,
        effect_generators: Vec<Vec<f64>>,
        unit_effect: Vec<f64>,
        tol: f64,
    ) -> Result<Self> {
        let labels = (0..effect_generators.len())
            .map(|i| format!("e{i}"))
            .collect();
        let sys = Self {
            ambient_dim,
            state_generators,
            effect_generators,
            effect_labels: labels,
            unit_effect,
            frame: None,
        };
        sys.validate(tol)?;
        Ok(sys)
    }

    /// System realized by Hermitian operators in an orthonormal `frame`.
    pub fn from_operators(
        frame: Vec<Matrix>,
        states: &[Matrix],
        effects: &[(String, Matrix)],
        unit: &Matrix,
        tol: f64,
    ) -> Result<Self> {
        let coords = |m: &Matrix| frame_coords(&frame, m);
        let sys = Self {
            ambient_dim: frame.len(),
            state_generators: states.iter().map(coords).collect(),
            effect_generators: effects.iter().map(|(_, e)| coords(e)).collect(),
            effect_labels: effects.iter().map(|(l, _)| l.clone()).collect(),
            unit_effect: coords(unit),
            frame: Some(frame),
        };
        sys.validate(tol)?;
        Ok(sys)
    }

    fn validate(&self, tol: f64) -> Result<()> {
        let d = self.ambient_dim;
        let all_vectors = self
            .state_generators
            .iter()
            .chain(&self.effect_generators)
            .chain(std::iter::once(&self.unit_effect));
        if d == 0 || all_vectors.into_iter().any(|v| v.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "vectors must have length {d}"
            )));
        }
        for w in &self.state_generators {
            let u = dot(&self.unit_effect, w);
            if (u - 1.0).abs() > tol {
                return Err(Error::InvalidState(format!(
                    "state generator has u(w) = {u}"
                )));
            }
            for e in &self.effect_generators {
                let p = dot(e, w);
                if p < -tol || p > 1.0 + tol {
                    return Err(Error::InvalidData(format!(
                        "effect probability {p} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn state_generators(&self) -> &[Vec<f64>] {
        &self.state_generators
    }

    pub fn effect_generators(&self) -> &[Vec<f64>] {
        &self.effect_generators
    }

    pub fn effect_labels(&self) -> &[String] {
        &self.effect_labels
    }

    pub fn unit_effect(&self) -> &[f64] {
        &self.unit_effect
    }

    pub fn frame(&self) -> Option<&[Matrix]> {
        self.frame.as_deref()
    }

    pub fn eval(&self, effect: &[f64], state: &[f64]) -> f64 {
        dot(effect, state)
    }

    /// Rank of the effect generators; equals `ambient_dim` iff the system is
    /// tomographic.
    pub fn effect_rank(&self, rel_tol: f64) -> usize {
        let d = self.ambient_dim;
        let rows: Vec<f64> = self.effect_generators.iter().flatten().copied().collect();
        rank_of(
            &DMatrix::from_row_slice(self.effect_generators.len(), d, &rows),
            rel_tol,
        )
    }
}

/// Orthonormal basis of a subspace of the composite space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceBasis {
    pub vectors: Vec<Vec<f64>>,
    pub label: SubspaceLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SubspaceLabel {
    ProductSpan,
    Holistic,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }
}

/// Two systems composed by a bilinear map into a composite space.
#[derive(Debug, Clone)]
pub struct CompositeModel {
    name: String,
    field: Field,
    sys_a: GptSystem,
    sys_b: GptSystem,
    composite_dim: usize,
    /// `composite_dim x (dim A * dim B)`; column `i * dim B + j` is `e_i (x) e_j`.
    compose: DMatrix<f64>,
    composite_state_generators: Vec<Vec<f64>>,
    composite_frame: Option<Vec<Matrix>>,
}

impl CompositeModel {
    /// Generic constructor. `compose` maps product coordinates into the
    /// composite space for states and effects alike.
    pub fn new(
        name: impl Into<String>,
        sys_a: GptSystem,
        sys_b: GptSystem,
        compose: DMatrix<f64>,
        composite_state_generators: Vec<Vec<f64>>,
        composite_frame: Option<Vec<Matrix>>,
        tol: f64,
    ) -> Result<Self> {
        let composite_dim = compose.nrows();
        if compose.ncols() != sys_a.ambient_dim * sys_b.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "compose has {} columns, expected {}",
                compose.ncols(),
                sys_a.ambient_dim * sys_b.ambient_dim
            )));
        }
        if composite_state_generators
            .iter()
            .any(|v| v.len() != composite_dim)
        {
            return Err(Error::DimensionMismatch(
                "composite generator length".into(),
            ));
        }
        if let Some(frame) = &composite_frame {
            if frame.len() != composite_dim {
                return Err(Error::DimensionMismatch("composite frame size".into()));
            }
        }
        let field = if composite_frame
            .as_ref()
            .is_some_and(|f| f.iter().all(|m| m.data().iter().all(|z| z.im == 0.0)))
        {
            Field::Real
        } else {
            Field::Complex
        };
        let cm = Self {
            name: name.into(),
            field,
            sys_a,
            sys_b,
            composite_dim,
            compose,
            composite_state_generators,
            composite_frame,
        };
        cm.validate(tol)?;
        Ok(cm)
    }

    /// `(e_A (x) e_B)(w_A (x) w_B) = e_A(w_A) e_B(w_B)` on all generator
    /// quadruples, and `u_AB(w) = 1` on composite generators.
    fn validate(&self, tol: f64) -> Result<()> {
        for ea in &self.sys_a.effect_generators {
            for eb in &self.sys_b.effect_generators {
                let e = self.compose_pair(ea, eb);
                for wa in &self.sys_a.state_generators {
                    for wb in &self.sys_b.state_generators {
                        let w = self.compose_pair(wa, wb);
                        let lhs = dot(&e, &w);
                        let rhs = dot(ea, wa) * dot(eb, wb);
                        if (lhs - rhs).abs() > tol {
                            return Err(Error::InvalidData(format!(
                                "composition is not multiplicative: {lhs} vs {rhs}"
                            )));
                        }
                    }
                }
            }
        }
        let u = self.unit_effect();
        for w in &self.composite_state_generators {
            if (dot(&u, w) - 1.0).abs() > tol {
                return Err(Error::InvalidState(
                    "composite generator not normalized".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sys_a(&self) -> &GptSystem {
        &self.sys_a
    }

    pub fn sys_b(&self) -> &GptSystem {
        &self.sys_b
    }

    pub fn composite_dim(&self) -> usize {
        self.composite_dim
    }

    pub fn composite_state_generators(&self) -> &[Vec<f64>] {
        &self.composite_state_generators
    }

    pub fn composite_frame(&self) -> Option<&[Matrix]> {
        self.composite_frame.as_deref()
    }

    /// `a (x) b` for states or effects.
    pub fn compose_pair(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let v = DVector::from_vec(outer_coords(a, b));
        (&self.compose * v).iter().copied().collect()
    }

    /// `u_A (x) u_B`.
    pub fn unit_effect(&self) -> Vec<f64> {
        self.compose_pair(&self.sys_a.unit_effect, &self.sys_b.unit_effect)
    }

    /// Composite covectors `e_A (x) e_B` over all effect-generator pairs, in
    /// row-major `(a, b)` order.
    pub fn local_effect_functionals(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for ea in &self.sys_a.effect_generators {
            for eb in &self.sys_b.effect_generators {
                out.push(self.compose_pair(ea, eb));
            }
        }
        out
    }

    /// Operator form of a composite vector.
    pub fn operator(&self, v: &[f64]) -> Option<Matrix> {
        let frame = self.composite_frame.as_ref()?;
        let m = frame_operator(frame, v);
        Some(match self.field {
            Field::Real => m.to_real(f64::INFINITY).expect("infinite tolerance"),
            Field::Complex => m,
        })
    }

    /// Coordinates of an operator; rejects operators outside the composite span.
    pub fn embed(&self, m: &Matrix, tol: f64) -> Result<Vec<f64>> {
        let frame = self
            .composite_frame
            .as_ref()
            .ok_or_else(|| Error::InvalidData("model has no operator realization".into()))?;
        if !m.is_square() || m.rows() != frame[0].rows() {
            return Err(Error::DimensionMismatch(format!(
                "operator side {} vs frame side {}",
                m.rows(),
                frame[0].rows()
            )));
        }
        let v = frame_coords(frame, m);
        let back = frame_operator(frame, &v);
        let residual = back.max_abs_diff(m);
        if residual > tol {
            return Err(Error::InvalidState(format!(
                "operator leaves the composite space by {residual:e}"
            )));
        }
        Ok(v)
    }

    /// Local coordinates of an operator on one side.
    pub fn embed_local(&self, side_b: bool, m: &Matrix) -> Result<Vec<f64>> {
        let sys = if side_b { &self.sys_b } else { &self.sys_a };
        let frame = sys
            .frame
            .as_ref()
            .ok_or_else(|| Error::InvalidData("system has no operator realization".into()))?;
        Ok(frame_coords(frame, m))
    }

    pub fn local_operator(&self, side_b: bool, v: &[f64]) -> Option<Matrix> {
        let sys = if side_b { &self.sys_b } else { &self.sys_a };
        sys.frame.as_ref().map(|f| frame_operator(f, v))
    }

    /// Smallest eigenvalue of the operator form, or `None` without a frame.
    pub fn min_eigenvalue(&self, v: &[f64]) -> Option<f64> {
        let m = self.operator(v)?;
        herm_eigen(&m).ok().map(|ev| ev[0])
    }

    /// Normalized and positive within `tol`.
    pub fn is_valid_state(&self, v: &[f64], tol: f64) -> bool {
        if v.len() != self.composite_dim {
            return false;
        }
        let normalized = (dot(&self.unit_effect(), v) - 1.0).abs() <= tol;
        normalized && self.min_eigenvalue(v).is_some_and(|l| l >= -tol)
    }

    /// Samples a valid composite state: a Ginibre density operator over the
    /// instance's field, projected onto the composite space. The projection
    /// is a twirl or a real-part map for the built-in instances, so
    /// positivity survives it.
    pub fn random_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let frame = self
            .composite_frame
            .as_ref()
            .ok_or_else(|| Error::InvalidData("model has no operator realization".into()))?;
        let side = frame[0].rows();
        let rho = random_density(side, side, self.field, rng);
        Ok(frame_coords(frame, &rho))
    }

    /// Samples a product `w_A (x) w_B` of random local states.
    pub fn random_product_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let mut local = |sys: &GptSystem| -> Result<Vec<f64>> {
            let frame = sys
                .frame
                .as_ref()
                .ok_or_else(|| Error::InvalidData("system has no operator realization".into()))?;
            let side = frame[0].rows();
            Ok(frame_coords(
                frame,
                &random_density(side, side, self.field, rng),
            ))
        };
        let a = local(&self.sys_a)?;
        let b = local(&self.sys_b)?;
        Ok(self.compose_pair(&a, &b))
    }
}

fn qubit_frame(paulis: &[usize]) -> Vec<Matrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    paulis.iter().map(|&k| pauli(k).scale(s)).collect()
}

/// Builds one of the three reference instances.
pub fn build_instance(kind: InstanceKind) -> CompositeModel {
    let tol = 1e-12;
    let id = Matrix::identity(2);
    let local_frame = qubit_frame(kind.local_paulis());

    // Pauli-frame states (I +/- P)/2 for the non-identity directions; for the
    // fermionic case these are the occupation projectors.
    let mut states = Vec::new();
    let mut effects = Vec::new();
    for &k in kind.local_paulis().iter().filter(|&&k| k != 0) {
        for (sign, tag) in [(1.0, '+'), (-1.0, '-')] {
            let proj = (&id + &pauli(k).scale(sign)).scale(0.5);
            states.push(proj.clone());
            effects.push((format!("{}{}", PAULI_LABELS[k], tag), proj));
        }
    }
    effects.push(("u".to_string(), id.clone()));
    let make_side = || {
        GptSystem::from_operators(local_frame.clone(), &states, &effects, &id, tol)
            .expect("reference system is consistent")
    };
    let sys_a = make_side();
    let sys_b = make_side();

    // Composite frame: admitted Pauli products (P_i (x) P_j) / 2, row-major.
    let mut composite_paulis = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            if kind.admits_pair(i, j) {
                composite_paulis.push((i, j));
            }
        }
    }
    let composite_frame: Vec<Matrix> = composite_paulis
        .iter()
        .map(|&(i, j)| kron_all(&[pauli(i), pauli(j)]).scale(0.5))
        .collect();

    let da = local_frame.len();
    let mut compose = DMatrix::zeros(composite_frame.len(), da * da);
    for (ia, fa) in local_frame.iter().enumerate() {
        for (ib, fb) in local_frame.iter().enumerate() {
            let prod = kron_all(&[fa.clone(), fb.clone()]);
            for (k, ck) in composite_frame.iter().enumerate() {
                compose[(k, ia * da + ib)] = hs_inner(ck, &prod).re;
            }
        }
    }

    // (I (x) I + P)/4 for each non-identity admitted product: valid states
    // spanning the whole composite space.
    let id4 = Matrix::identity(4);
    let composite_state_generators = composite_paulis
        .iter()
        .filter(|&&p| p != (0, 0))
        .flat_map(|&(i, j)| {
            let p = kron_all(&[pauli(i), pauli(j)]);
            [1.0, -1.0].map(|sign| (&id4 + &p.scale(sign)).scale(0.25))
        })
        .map(|m| frame_coords(&composite_frame, &m))
        .collect();

    CompositeModel::new(
        kind.name(),
        sys_a,
        sys_b,
        compose,
        composite_state_generators,
        Some(composite_frame),
        tol,
    )
    .expect("reference instance is consistent")
}

/// `(s_A, s_B)` with `s_A = (. (x) u_B)(s)` and `s_B = (u_A (x) .)(s)`.
pub fn marginals(cm: &CompositeModel, s: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if s.len() != cm.composite_dim {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} in a {}-dimensional composite space",
            s.len(),
            cm.composite_dim
        )));
    }
    let (da, db) = (cm.sys_a.ambient_dim, cm.sys_b.ambient_dim);
    let basis =
        |d: usize, i: usize| -> Vec<f64> { (0..d).map(|k| f64::from(u8::from(k == i))).collect() };
    let sa = (0..da)
        .map(|i| dot(&cm.compose_pair(&basis(da, i), &cm.sys_b.unit_effect), s))
        .collect();
    let sb = (0..db)
        .map(|j| dot(&cm.compose_pair(&cm.sys_a.unit_effect, &basis(db, j)), s))
        .collect();
    Ok((sa, sb))
}

/// Orthonormal basis of `span{w_A (x) w_B}` over all state-generator pairs.
pub fn product_span(cm: &CompositeModel) -> Result<SubspaceBasis> {
    let mut cols = Vec::new();
    for wa in &cm.sys_a.state_generators {
        for wb in &cm.sys_b.state_generators {
            cols.push(cm.compose_pair(wa, wb));
        }
    }
    if cols.is_empty() {
        return Err(Error::DegenerateGenerators);
    }
    let d = cm.composite_dim;
    let m = DMatrix::from_fn(d, cols.len(), |i, j| cols[j][i]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::DegenerateGenerators);
    }
    let vectors = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > RANK_REL_TOL * max)
        .map(|(k, _)| u.column(k).iter().copied().collect())
        .collect();
    Ok(SubspaceBasis {
        vectors,
        label: SubspaceLabel::ProductSpan,
    })
}

/// Orthogonal complement of the product span. Built by projecting the
/// composite coordinate axes in order and Gram-Schmidt, so the result is
/// deterministic and aligned with the frame where possible.
pub fn holistic_subspace(cm: &CompositeModel) -> Result<SubspaceBasis> {
    let span = product_span(cm)?;
    let d = cm.composite_dim;
    let target = d - span.dim();
    let mut accepted: Vec<Vec<f64>> = Vec::with_capacity(target);
    for k in 0..d {
        if accepted.len() == target {
            break;
        }
        let mut v: Vec<f64> = (0..d).map(|i| f64::from(u8::from(i == k))).collect();
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for q in span.vectors.iter().chain(&accepted) {
                let p = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = norm(&v);
        if n > RANK_REL_TOL.sqrt() {
            accepted.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    Ok(SubspaceBasis {
        vectors: accepted,
        label: SubspaceLabel::Holistic,
    })
}

/// Rank of the local-effect functionals `e_A (x) e_B` equals the composite
/// dimension. `rel_tol` is the relative singular-value cutoff.
pub fn is_locally_tomographic(cm: &CompositeModel, rel_tol: f64) -> bool {
    local_effect_rank(cm, rel_tol) == cm.composite_dim
}

pub fn local_effect_rank(cm: &CompositeModel, rel_tol: f64) -> usize {
    let rows = cm.local_effect_functionals();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    rank_of(
        &DMatrix::from_row_slice(rows.len(), cm.composite_dim, &flat),
        rel_tol,
    )
}

/// Max over effect-generator pairs of `|(e_A (x) e_B)(s) - e_A(s_A) e_B(s_B)|`,
/// with the first pair attaining it.
pub fn operational_residual(cm: &CompositeModel, s: &[f64]) -> Result<(f64, (usize, usize))> {
    let (sa, sb) = marginals(cm, s)?;
    let mut best = (-1.0, (0, 0));
    for (i, ea) in cm.sys_a.effect_generators.iter().enumerate() {
        for (j, eb) in cm.sys_b.effect_generators.iter().enumerate() {
            let joint = dot(&cm.compose_pair(ea, eb), s);
            let d = (joint - dot(ea, &sa) * dot(eb, &sb)).abs();
            if d > best.0 {
                best = (d, (i, j));
            }
        }
    }
    Ok(best)
}

/// `|| s - s_A (x) s_B ||`.
pub fn product_residual(cm: &CompositeModel, s: &[f64]) -> Result<f64> {
    let (sa, sb) = marginals(cm, s)?;
    let p = cm.compose_pair(&sa, &sb);
    Ok(s.iter()
        .zip(&p)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Biconditional "operationally independent iff product of marginals" on
/// seeded random states. Even trials sample products of local states, odd
/// trials sample generic composite states; trial `t` uses seed `seed + t`.
pub fn prop1_check(cm: &CompositeModel, trials: usize, seed: u64, tol: f64) -> Result<Report> {
    if !is_locally_tomographic(cm, RANK_REL_TOL) {
        return Err(Error::NotLocallyTomographic);
    }
    let mut disagreements = 0usize;
    let (mut product_trials, mut generic_trials) = (0usize, 0usize);
    let mut product_ok = true;
    let mut generic_ok = true;
    let mut product_max = 0.0f64;
    let mut generic_min = f64::INFINITY;
    for t in 0..trials {
        let mut r = rng(seed.wrapping_add(t as u64));
        let s = if t % 2 == 0 {
            cm.random_product_state(&mut r)?
        } else {
            cm.random_state(&mut r)?
        };
        let (op, _) = operational_residual(cm, &s)?;
        let prod = product_residual(cm, &s)?;
        let independent = op <= tol;
        let product = prod <= tol;
        if independent != product {
            disagreements += 1;
        }
        if t % 2 == 0 {
            product_trials += 1;
            product_ok &= independent && product;
            product_max = product_max.max(op.max(prod));
        } else {
            generic_trials += 1;
            generic_ok &= !independent && !product;
            generic_min = generic_min.min(op);
        }
    }
    if generic_trials == 0 {
        generic_min = 0.0;
    }
    let mut report = Report::new(format!("prop1/{}", cm.name), tol, seed);
    report
        .push(
            Check::new("biconditional", disagreements == 0, disagreements as f64).with_witness(
                json!({
                    "trials": trials,
                    "product_trials": product_trials,
                    "generic_trials": generic_trials,
                }),
            ),
        )
        .push(Check::new(
            "product_trials_independent",
            product_ok,
            product_max,
        ))
        .push(Check::new(
            "generic_trials_dependent",
            generic_ok,
            generic_min,
        ));
    Ok(report)
}

/// Perturbs a product state along a holistic direction: returns
/// `s + t h` for the first holistic basis vector `h` and the largest grid
/// value `t != 0` that keeps the state valid, together with the checks that
/// it is locally indistinguishable from `s` yet not a product.
pub fn prop2_witness(
    cm: &CompositeModel,
    base_product: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, Report)> {
    let holistic = holistic_subspace(cm)?;
    if holistic.is_empty() {
        return Err(Error::HolisticEmpty);
    }
    if !cm.is_valid_state(base_product, tol) {
        return Err(Error::InvalidState("base state is not valid".into()));
    }
    if product_residual(cm, base_product)? > tol {
        return Err(Error::InvalidState("base state is not a product".into()));
    }

    let mut found = None;
    'search: for (idx, h) in holistic.vectors.iter().enumerate() {
        for k in (-WITNESS_GRID_STEPS..=WITNESS_GRID_STEPS).rev() {
            if k == 0 {
                continue;
            }
            let t = f64::from(k) / f64::from(WITNESS_GRID_STEPS);
            let cand: Vec<f64> = base_product.iter().zip(h).map(|(s, x)| s + t * x).collect();
            if cm.is_valid_state(&cand, tol) {
                found = Some((idx, t, cand));
                break 'search;
            }
        }
    }
    let (idx, t, tilde) = found.ok_or(Error::NoWitness)?;

    let mut report = Report::new(format!("prop2-witness/{}", cm.name), tol, 0);
    let norm_res = (dot(&cm.unit_effect(), &tilde) - 1.0).abs();
    report.push(
        Check::new("normalized", norm_res <= tol, norm_res).with_witness(json!({
            "t": t,
            "holistic_index": idx,
        })),
    );

    let min_ev = cm.min_eigenvalue(&tilde).unwrap_or(f64::NEG_INFINITY);
    report.push(Check::new(
        "valid_state",
        min_ev >= -tol,
        (-min_ev).max(0.0),
    ));

    let stats = cm
        .local_effect_functionals()
        .iter()
        .map(|e| (dot(e, &tilde) - dot(e, base_product)).abs())
        .fold(0.0, f64::max);
    report.push(Check::new(
        "local_statistics_identical",
        stats <= tol,
        stats,
    ));

    let (sa, sb) = marginals(cm, base_product)?;
    let (ta, tb) = marginals(cm, &tilde)?;
    let diff = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let marg = diff(&sa, &ta).max(diff(&sb, &tb));
    report.push(Check::new("marginals_identical", marg <= tol, marg));

    let (op, _) = operational_residual(cm, &tilde)?;
    report.push(Check::new("operationally_independent", op <= tol, op));

    let prod = product_residual(cm, &tilde)?;
    report.push(Check::new("not_product", prod > tol, prod));

    Ok((tilde, report))
}

/// `Ok(true)` iff `prop2_witness` produces a witness for at least one of
/// `samples` random product base states (seeds `seed..seed + samples`).
pub fn witness_exists_for_sample(
    cm: &CompositeModel,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<bool> {
    for k in 0..samples {
        let mut r = rng(seed.wrapping_add(k as u64));
        let base = cm.random_product_state(&mut r)?;
        match prop2_witness(cm, &base, tol) {
            Ok(_) => return Ok(true),
            Err(Error::HolisticEmpty | Error::NoWitness) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::independence::rho_ab;
    use crate::linops::{partial_trace_op, sigma_y, DEFAULT_TOL};

    fn maximally_mixed(cm: &CompositeModel) -> Vec<f64> {
        cm.embed(&Matrix::identity(4).scale(0.25), 1e-12).unwrap()
    }

    #[test]
    fn dimension_table() {
        let expected = [
            (InstanceKind::ComplexQubitPair, 16, 16, 0),
            (InstanceKind::RealQubitPair, 10, 9, 1),
            (InstanceKind::FermiTwoModes, 8, 4, 4),
        ];
        for (kind, dim, rank, hol) in expected {
            let cm = build_instance(kind);
            assert_eq!(cm.composite_dim(), dim, "{kind}");
            assert_eq!(product_span(&cm).unwrap().dim(), rank, "{kind}");
            assert_eq!(holistic_subspace(&cm).unwrap().dim(), hol, "{kind}");
        }
    }

    #[test]
    fn tomography_verdicts() {
        assert!(is_locally_tomographic(
            &build_instance(InstanceKind::ComplexQubitPair),
            RANK_REL_TOL
        ));
        assert!(!is_locally_tomographic(
            &build_instance(InstanceKind::RealQubitPair),
            RANK_REL_TOL
        ));
        assert!(!is_locally_tomographic(
            &build_instance(InstanceKind::FermiTwoModes),
            RANK_REL_TOL
        ));
    }

    #[test]
    fn real_holistic_direction_is_yy() {
        let cm = build_instance(InstanceKind::RealQubitPair);
        let h = holistic_subspace(&cm).unwrap();
        let op = cm.operator(&h.vectors[0]).unwrap();
        let yy = kron_all(&[sigma_y(), sigma_y()]).scale(0.5);
        assert!(op.max_abs_diff(&yy) < 1e-12, "{op:?}");
    }

    #[test]
    fn fermi_holistic_contains_counterexample_direction() {
        let cm = build_instance(InstanceKind::FermiTwoModes);
        let h = holistic_subspace(&cm).unwrap();
        let diff = cm
            .embed(&(rho_ab().op() - &Matrix::identity(4).scale(0.25)), 1e-12)
            .unwrap();
        // Projection onto the holistic basis reproduces the vector.
        let mut proj = vec![0.0; diff.len()];
        for v in &h.vectors {
            let p = dot(v, &diff);
            proj.iter_mut().zip(v).for_each(|(x, y)| *x += p * y);
        }
        let err = proj
            .iter()
            .zip(&diff)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn marginals_examples() {
        let cm = build_instance(InstanceKind::FermiTwoModes);
        let s = cm.embed(rho_ab().op(), 1e-12).unwrap();
        let (sa, sb) = marginals(&cm, &s).unwrap();
        let half = Matrix::identity(2).scale(0.5);
        // Oracle: linops partial trace.
        let oracle_a = partial_trace_op(rho_ab().op(), &[2, 2], 0).unwrap();
        assert!(
            cm.local_operator(false, &sa)
                .unwrap()
                .max_abs_diff(&oracle_a)
                < 1e-12
        );
        assert!(cm.local_operator(true, &sb).unwrap().max_abs_diff(&half) < 1e-12);

        let real = build_instance(InstanceKind::RealQubitPair);
        let (ra, rb) = marginals(&real, &maximally_mixed(&real)).unwrap();
        assert!(real.local_operator(false, &ra).unwrap().max_abs_diff(&half) < 1e-12);
        assert!(real.local_operator(true, &rb).unwrap().max_abs_diff(&half) < 1e-12);

        let cq = build_instance(InstanceKind::ComplexQubitPair);
        let wa = cq.sys_a().state_generators()[0].clone();
        let wb = cq.sys_b().state_generators()[3].clone();
        let (ma, mb) = marginals(&cq, &cq.compose_pair(&wa, &wb)).unwrap();
        for (x, y) in ma.iter().zip(&wa).chain(mb.iter().zip(&wb)) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(marginals(&cq, &[1.0]).is_err());
    }

    #[test]
    fn holistic_vectors_are_invisible() {
        for kind in InstanceKind::ALL {
            let cm = build_instance(kind);
            for h in &holistic_subspace(&cm).unwrap().vectors {
                for e in cm.local_effect_functionals() {
                    assert!(dot(&e, h).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn prop2_fermi_reproduces_rho_ab() {
        let cm = build_instance(InstanceKind::FermiTwoModes);
        let (tilde, report) = prop2_witness(&cm, &maximally_mixed(&cm), DEFAULT_TOL).unwrap();
        assert!(report.passed(), "{}", report.to_text());
        let op = cm.operator(&tilde).unwrap();
        assert!(op.max_abs_diff(rho_ab().op()) < 1e-12, "{op:?}");
    }

    #[test]
    fn prop2_real_witness() {
        let cm = build_instance(InstanceKind::RealQubitPair);
        let (tilde, report) = prop2_witness(&cm, &maximally_mixed(&cm), DEFAULT_TOL).unwrap();
        assert!(report.passed(), "{}", report.to_text());
        let op = cm.operator(&tilde).unwrap();
        let yy = kron_all(&[sigma_y(), sigma_y()]);
        let expected = (&Matrix::identity(4).to_complex() + &yy).scale(0.25);
        assert!(op.max_abs_diff(&expected) < 1e-12);
        let ev = herm_eigen(&op).unwrap();
        for (got, want) in ev.iter().zip([0.0, 0.0, 0.5, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn prop2_rejects_tomographic_model() {
        let cm = build_instance(InstanceKind::ComplexQubitPair);
        assert_eq!(
            prop2_witness(&cm, &maximally_mixed(&cm), DEFAULT_TOL).unwrap_err(),
            Error::HolisticEmpty
        );
    }

    #[test]
    fn prop2_reports_missing_witness_on_pure_base() {
        // |00><00| sits on the boundary: any holistic push leaves the cone.
        let cm = build_instance(InstanceKind::FermiTwoModes);
        let base = cm
            .embed(&Matrix::diag(&[1.0, 0.0, 0.0, 0.0]), 1e-12)
            .unwrap();
        assert_eq!(
            prop2_witness(&cm, &base, DEFAULT_TOL).unwrap_err(),
            Error::NoWitness
        );
    }

    #[test]
    fn prop1_on_complex_pair() {
        let cm = build_instance(InstanceKind::ComplexQubitPair);
        let report = prop1_check(&cm, 100, 0, DEFAULT_TOL).unwrap();
        assert!(report.passed(), "{}", report.to_text());
        assert_eq!(
            prop1_check(
                &build_instance(InstanceKind::RealQubitPair),
                10,
                0,
                DEFAULT_TOL
            )
            .unwrap_err(),
            Error::NotLocallyTomographic
        );
    }

    #[test]
    fn entangled_state_fails_both_sides() {
        let cm = build_instance(InstanceKind::ComplexQubitPair);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = [
            crate::linops::c(h, 0.0),
            crate::linops::c(0.0, 0.0),
            crate::linops::c(0.0, 0.0),
            crate::linops::c(h, 0.0),
        ];
        let s = cm.embed(&Matrix::outer(&phi, &phi), 1e-12).unwrap();
        assert!(product_residual(&cm, &s).unwrap() > 0.1);
        // X+ (x) X+ : 1/2 - 1/4 = 1/4 on the projector effects.
        let (op, _) = operational_residual(&cm, &s).unwrap();
        assert!((op - 0.25).abs() < 1e-12, "{op}");
    }

    #[test]
    fn single_systems_are_tomographic() {
        for kind in InstanceKind::ALL {
            let cm = build_instance(kind);
            assert_eq!(
                cm.sys_a().effect_rank(RANK_REL_TOL),
                cm.sys_a().ambient_dim()
            );
        }
    }

    #[test]
    fn instance_names_parse() {
        for kind in InstanceKind::ALL {
            assert_eq!(kind.name().parse::<InstanceKind>().unwrap(), kind);
        }
        assert_eq!(
            "COMPLEX_QUBIT_PAIR".parse::<InstanceKind>().unwrap(),
            InstanceKind::ComplexQubitPair
        );
        assert!("quaternion".parse::<InstanceKind>().is_err());
    }

    #[test]
    fn abstract_system_validation() {
        // Classical bit: states are point masses, effects are indicator functions.
        let ok = GptSystem::new(
            2,
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0]],
            vec![1.0, 1.0],
            1e-12,
        );
        assert!(ok.is_ok());
        let unnormalized = GptSystem::new(2, vec![vec![2.0, 0.0]], vec![], vec![1.0, 1.0], 1e-12);
        assert!(unnormalized.is_err());
        let bad_effect = GptSystem::new(
            2,
            vec![vec![1.0, 0.0]],
            vec![vec![3.0, 0.0]],
            vec![1.0, 1.0],
            1e-12,
        );
        assert!(bad_effect.is_err());
    }
}
