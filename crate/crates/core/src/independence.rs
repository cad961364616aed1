//! Operational independence versus independent preparation under the
//! fermionic parity superselection rule.
//!
//! Operational independence is decided on spanning bases of the local effect
//! spaces: joint probabilities are bilinear in the effects, so factorization
//! on a basis pair extends to every pair of effects in the spans.

use serde_json::json;

use crate::error::{Error, Result};
use crate::fermion::{
    allowed_effect_basis, build_modes, local_parity, EffectBasis, ModeSet, ModeSystem,
};
use crate::linops::{
    c, commutator_norm, herm_eigen, hs_inner, kron_all, partial_trace_op, partial_transpose_b,
    Matrix, QuantumState, C64,
};
use crate::report::{Check, Report};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `(|00> + |11>) / sqrt 2`, even parity.
pub fn phi_plus() -> Vec<C64> {
    vec![c(H, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(H, 0.0)]
}

pub fn phi_minus() -> Vec<C64> {
    vec![c(H, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-H, 0.0)]
}

/// `(|01> + |10>) / sqrt 2`, odd parity.
pub fn psi_plus() -> Vec<C64> {
    vec![c(0.0, 0.0), c(H, 0.0), c(H, 0.0), c(0.0, 0.0)]
}

pub fn psi_minus() -> Vec<C64> {
    vec![c(0.0, 0.0), c(H, 0.0), c(-H, 0.0), c(0.0, 0.0)]
}

/// Equal mixture of the even and odd Bell projectors `|phi+><phi+|` and
/// `|psi+><psi+|` on two modes.
pub fn rho_ab() -> QuantumState {
    QuantumState::new(
        (&bell_projector(true) + &bell_projector(false)).scale(0.5),
        vec![2, 2],
    )
    .expect("mixture of Bell projectors")
}

/// `|phi+><phi+|` (even) or `|psi+><psi+|` (odd), built from unnormalized
/// kets so every entry is an exact dyadic rational.
pub fn bell_projector(even: bool) -> Matrix {
    let (one, zero) = (c(1.0, 0.0), c(0.0, 0.0));
    let ket = if even {
        [one, zero, zero, one]
    } else {
        [zero, one, one, zero]
    };
    Matrix::outer(&ket, &ket).scale(0.5)
}

/// Finite unitary group with uniform weights.
#[derive(Debug, Clone)]
pub struct TwirlGroup {
    elements: Vec<Matrix>,
}

impl TwirlGroup {
    /// Checks unitarity of every element and closure under products.
    pub fn new(elements: Vec<Matrix>, tol: f64) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidData("empty group".into()));
        }
        let side = elements[0].rows();
        let id = Matrix::identity(side);
        for (i, u) in elements.iter().enumerate() {
            if !u.is_square() || u.rows() != side {
                return Err(Error::DimensionMismatch(
                    "group elements differ in shape".into(),
                ));
            }
            if (u * &u.adjoint()).max_abs_diff(&id) > tol {
                return Err(Error::NotUnitary(i));
            }
        }
        for a in &elements {
            for b in &elements {
                let ab = a * b;
                if !elements.iter().any(|g| g.max_abs_diff(&ab) <= tol) {
                    return Err(Error::NotClosed);
                }
            }
        }
        Ok(Self { elements })
    }

    /// `{Pi_A^x Pi_B^y : x, y in {0, 1}}` for a two-party split of the modes.
    pub fn local_parity_group(ms: &ModeSystem, a: &ModeSet, b: &ModeSet) -> Result<Self> {
        let pa = ms.parity(a)?;
        let pb = ms.parity(b)?;
        let id = Matrix::identity(ms.dim());
        let elements = vec![id, pa.clone(), pb.clone(), &pa * &pb];
        Self::new(elements, 0.0)
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// `(1/|G|) sum_U U s U^dagger`.
pub fn twirl(s: &QuantumState, g: &TwirlGroup) -> Result<QuantumState> {
    if g.elements[0].rows() != s.side() {
        return Err(Error::DimensionMismatch(format!(
            "group acts on dimension {}, state has side {}",
            g.elements[0].rows(),
            s.side()
        )));
    }
    let mut acc = Matrix::zeros(s.side(), s.side());
    for u in &g.elements {
        acc = &acc + &(&(u * s.op()) * &u.adjoint());
    }
    let out = acc.scale(1.0 / g.order() as f64);
    QuantumState::new(out, s.dims().to_vec())
}

/// Result of the basis-pair factorization test.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationalIndependence {
    pub independent: bool,
    pub max_residual: f64,
    /// Basis indices `(a, b)` of the first pair attaining `max_residual`.
    pub witness: Option<(usize, usize)>,
    pub witness_labels: Option<(String, String)>,
}

impl OperationalIndependence {
    pub fn witness_json(&self) -> Option<serde_json::Value> {
        self.witness_labels
            .as_ref()
            .map(|(a, b)| json!({"effect_a": a, "effect_b": b}))
    }
}

fn bipartite_dims(s: &QuantumState) -> Result<(usize, usize)> {
    match s.dims() {
        [a, b] => Ok((*a, *b)),
        other => Err(Error::UnsupportedDims(other.to_vec())),
    }
}

/// Max over basis pairs of `|Tr[(e_a (x) e_b) s] - Tr[e_a s_A] Tr[e_b s_B]|`.
/// Ties go to the lowest `(a, b)` pair.
pub fn is_operationally_independent(
    s: &QuantumState,
    basis_a: &EffectBasis,
    basis_b: &EffectBasis,
    tol: f64,
) -> Result<OperationalIndependence> {
    let (da, db) = bipartite_dims(s)?;
    if basis_a.side() != da || basis_b.side() != db {
        return Err(Error::DimensionMismatch(format!(
            "bases act on ({}, {}), state dims ({da}, {db})",
            basis_a.side(),
            basis_b.side()
        )));
    }
    let rho_a = partial_trace_op(s.op(), s.dims(), 0)?;
    let rho_b = partial_trace_op(s.op(), s.dims(), 1)?;
    let pa: Vec<f64> = basis_a
        .elements
        .iter()
        .map(|e| hs_inner(e, &rho_a).re)
        .collect();
    let pb: Vec<f64> = basis_b
        .elements
        .iter()
        .map(|e| hs_inner(e, &rho_b).re)
        .collect();

    let mut best = (-1.0f64, None);
    for (i, ea) in basis_a.elements.iter().enumerate() {
        for (j, eb) in basis_b.elements.iter().enumerate() {
            let joint = hs_inner(&kron_all(&[ea.clone(), eb.clone()]), s.op()).re;
            let delta = (joint - pa[i] * pb[j]).abs();
            if delta > best.0 {
                best = (delta, Some((i, j)));
            }
        }
    }
    let (max_residual, witness) = best;
    Ok(OperationalIndependence {
        independent: max_residual <= tol,
        max_residual,
        witness,
        witness_labels: witness
            .map(|(i, j)| (basis_a.labels[i].clone(), basis_b.labels[j].clone())),
    })
}

/// `|| s - s_A (x) s_B ||_F`.
pub fn product_residual(s: &QuantumState) -> Result<f64> {
    bipartite_dims(s)?;
    let rho_a = partial_trace_op(s.op(), s.dims(), 0)?;
    let rho_b = partial_trace_op(s.op(), s.dims(), 1)?;
    Ok((s.op() - &kron_all(&[rho_a, rho_b])).frobenius_norm())
}

/// A bipartite state is a product iff it equals the product of its own marginals.
pub fn is_product(s: &QuantumState, tol: f64) -> Result<bool> {
    Ok(product_residual(s)? <= tol)
}

/// Splits `n` modes as `A = {0..k}`, `B = {k..n}`. Only such leftmost/rightmost
/// splits line up with the Kronecker factorization of the Fock space.
fn split_point(ms: &ModeSystem, a: &ModeSet, b: &ModeSet) -> Result<usize> {
    let n = ms.n_modes();
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidPartition(
            "both parties need at least one mode".into(),
        ));
    }
    if !a.is_disjoint(b) {
        return Err(Error::InvalidPartition(format!("{a} and {b} overlap")));
    }
    if a.union(b) != ModeSet::all(n) {
        return Err(Error::InvalidPartition(format!(
            "{a} and {b} do not cover {n} modes"
        )));
    }
    if a.first() != Some(0) || !a.is_contiguous() || !b.is_contiguous() {
        return Err(Error::InvalidPartition(format!(
            "party A must hold a leading block of modes, got {a} | {b}"
        )));
    }
    Ok(a.len())
}

fn reshape_for_partition(ms: &ModeSystem, s: &QuantumState, k: usize) -> Result<QuantumState> {
    if s.side() != ms.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state side {} on {} modes",
            s.side(),
            ms.n_modes()
        )));
    }
    let dims = vec![1usize << k, 1usize << (ms.n_modes() - k)];
    if s.dims() == dims.as_slice() {
        return Ok(s.clone());
    }
    QuantumState::new(s.op().clone(), dims)
}

/// Product of two marginals each of which commutes with its local parity.
pub fn is_independently_preparable_fit(
    ms: &ModeSystem,
    s: &QuantumState,
    partition: (&ModeSet, &ModeSet),
    tol: f64,
) -> Result<bool> {
    let k = split_point(ms, partition.0, partition.1)?;
    let s = reshape_for_partition(ms, s, k)?;
    if !is_product(&s, tol)? {
        return Ok(false);
    }
    let rho_a = partial_trace_op(s.op(), s.dims(), 0)?;
    let rho_b = partial_trace_op(s.op(), s.dims(), 1)?;
    let ok_a = commutator_norm(&rho_a, &local_parity(k))? <= tol;
    let ok_b = commutator_norm(&rho_b, &local_parity(ms.n_modes() - k))? <= tol;
    Ok(ok_a && ok_b)
}

/// Smallest eigenvalue of the partial transpose on the second factor.
pub fn min_partial_transpose_eigenvalue(s: &QuantumState) -> Result<f64> {
    let (da, db) = bipartite_dims(s)?;
    let ev = herm_eigen(&partial_transpose_b(s.op(), da, db))?;
    Ok(ev[0])
}

/// Peres-Horodecki test; conclusive for 2x2 and 2x3, rejected otherwise.
pub fn ppt_separable_2x2(s: &QuantumState, tol: f64) -> Result<bool> {
    match s.dims() {
        [2, 2] | [2, 3] | [3, 2] => Ok(min_partial_transpose_eigenvalue(s)? >= -tol),
        other => Err(Error::UnsupportedDims(other.to_vec())),
    }
}

fn max_off_diagonal(m: &Matrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Membership in the convex hull of products of single-mode SSR states.
/// Single-mode SSR states are diagonal, so the hull is the set of diagonal
/// two-mode states.
pub fn is_ssr_separable_two_modes(ms: &ModeSystem, s: &QuantumState, tol: f64) -> Result<bool> {
    if ms.n_modes() != 2 {
        return Err(Error::WrongModeCount {
            expected: 2,
            got: ms.n_modes(),
        });
    }
    if s.side() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "state side {} on 2 modes",
            s.side()
        )));
    }
    Ok(max_off_diagonal(s.op()) <= tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceVerdict {
    pub operationally_independent: bool,
    pub product_state: bool,
    pub independently_preparable: bool,
    pub max_residual: f64,
    pub witness: Option<(String, String)>,
}

/// Full verdict for a state on a two-party mode split, with SSR-restricted
/// local effects.
pub fn independence_verdict(
    ms: &ModeSystem,
    s: &QuantumState,
    partition: (&ModeSet, &ModeSet),
    tol: f64,
) -> Result<IndependenceVerdict> {
    let k = split_point(ms, partition.0, partition.1)?;
    let s = reshape_for_partition(ms, s, k)?;
    let basis_a = allowed_effect_basis(ms, partition.0, true)?;
    let basis_b = allowed_effect_basis(ms, partition.1, true)?;
    let op = is_operationally_independent(&s, &basis_a, &basis_b, tol)?;
    Ok(IndependenceVerdict {
        operationally_independent: op.independent,
        product_state: is_product(&s, tol)?,
        independently_preparable: is_independently_preparable_fit(ms, &s, partition, tol)?,
        max_residual: op.max_residual,
        witness: op.witness_labels,
    })
}

/// Runs the eight counterexample checks on an arbitrary two-mode state.
/// Every check is phrased so that it passes on the Bell mixture `rho_ab`.
pub fn counterexample_checks(s: &QuantumState, tol: f64) -> Result<Report> {
    let ms = build_modes(2)?;
    let (a, b) = (ModeSet::single(0), ModeSet::single(1));
    let s = reshape_for_partition(&ms, s, 1)?;
    let mut report = Report::new("counterexample", tol, 0);

    let ssr = commutator_norm(s.op(), &ms.total_parity())?;
    report.push(Check::new("ssr_valid_state", ssr <= tol, ssr));

    let group = TwirlGroup::local_parity_group(&ms, &a, &b)?;
    let twirled = twirl(&s, &group)?;
    let maximally_mixed = Matrix::identity(4).scale(0.25);
    let tw = twirled.op().max_abs_diff(&maximally_mixed);
    report.push(Check::new("twirl_equals_identity_over_4", tw <= tol, tw));

    let ssr_a = allowed_effect_basis(&ms, &a, true)?;
    let ssr_b = allowed_effect_basis(&ms, &b, true)?;
    let op = is_operationally_independent(&s, &ssr_a, &ssr_b, tol)?;
    let mut check = Check::new(
        "operationally_independent_ssr",
        op.independent,
        op.max_residual,
    );
    if let Some(w) = op.witness_json() {
        check = check.with_witness(w);
    }
    report.push(check);

    let free_a = allowed_effect_basis(&ms, &a, false)?;
    let free_b = allowed_effect_basis(&ms, &b, false)?;
    let op = is_operationally_independent(&s, &free_a, &free_b, tol)?;
    let mut check = Check::new("dependent_unrestricted", !op.independent, op.max_residual);
    if let Some(w) = op.witness_json() {
        check = check.with_witness(w);
    }
    report.push(check);

    let prod = product_residual(&s)?;
    report.push(Check::new("not_product", prod > tol, prod));

    let fit = is_independently_preparable_fit(&ms, &s, (&a, &b), tol)?;
    report.push(Check::new(
        "not_fit_preparable",
        !fit,
        if fit { 0.0 } else { 1.0 },
    ));

    let min_pt = min_partial_transpose_eigenvalue(&s)?;
    report.push(Check::new(
        "ppt_separable",
        min_pt >= -tol,
        (-min_pt).max(0.0),
    ));

    let off = max_off_diagonal(s.op());
    report.push(Check::new("not_ssr_separable", off > tol, off));

    Ok(report)
}

/// The Bell-mixture counterexample: SSR-valid, operationally independent
/// under parity-allowed effects, yet not preparable from local SSR states.
pub fn counterexample_scenario(tol: f64) -> Report {
    counterexample_checks(&rho_ab(), tol).expect("fixed two-mode construction")
}
