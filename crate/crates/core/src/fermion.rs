//! Fermionic Fock space of `n` modes in the Jordan-Wigner representation.
//!
//! Mode 0 is the leftmost tensor factor. The lowering operator of mode `j`
//! carries a parity string on every lower-indexed mode:
//!
//! ```text
//! f_j = Z (x) ... (x) Z (x) sigma^- (x) I (x) ... (x) I
//!       `--- j ---'                   `-- n-j-1 --'
//! ```
//!
//! with `sigma^- = |0><1|` and `Z = diag(1, -1)`. The occupation string
//! `(b_0 .. b_{n-1})` sits at basis index `sum_j b_j 2^(n-1-j)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::{
    anticommutator, c, commutator_norm, kron_all, pauli, sigma_minus, sigma_plus, sigma_z, Matrix,
    QuantumState, C64, EXACT_TOL, PAULI_LABELS,
};
use crate::report::{Check, Report};

pub const MAX_MODES: usize = 10;

/// Sorted set of mode indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ModeSet(BTreeSet<usize>);

impl ModeSet {
    pub fn new(modes: impl IntoIterator<Item = usize>) -> Self {
        Self(modes.into_iter().collect())
    }

    pub fn single(mode: usize) -> Self {
        Self::new([mode])
    }

    pub fn all(n_modes: usize) -> Self {
        Self::new(0..n_modes)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, mode: usize) -> bool {
        self.0.contains(&mode)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_disjoint(&self, other: &ModeSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &ModeSet) -> ModeSet {
        Self(self.0.union(&other.0).copied().collect())
    }

    /// True iff the set is `{start, start + 1, .., start + len - 1}`.
    pub fn is_contiguous(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&lo), Some(&hi)) => hi - lo + 1 == self.0.len(),
            _ => true,
        }
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }
}

impl fmt::Display for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Debug, Clone)]
pub struct ModeSystem {
    n_modes: usize,
    lowering: Vec<Matrix>,
}

/// Jordan-Wigner mode system on `n` modes, `1 <= n <= 10`.
pub fn build_modes(n: usize) -> Result<ModeSystem> {
    if !(1..=MAX_MODES).contains(&n) {
        return Err(Error::ModeCountOutOfRange(n));
    }
    let lowering = (0..n)
        .map(|j| {
            let factors: Vec<Matrix> = (0..n)
                .map(|k| match k.cmp(&j) {
                    std::cmp::Ordering::Less => sigma_z(),
                    std::cmp::Ordering::Equal => sigma_minus(),
                    std::cmp::Ordering::Greater => Matrix::identity(2),
                })
                .collect();
            kron_all(&factors)
        })
        .collect();
    Ok(ModeSystem {
        n_modes: n,
        lowering,
    })
}

impl ModeSystem {
    /// Wraps arbitrary lowering operators, e.g. to probe `check_car` with a
    /// broken representation.
    pub fn from_lowering_ops(lowering: Vec<Matrix>) -> Result<Self> {
        let n = lowering.len();
        if !(1..=MAX_MODES).contains(&n) {
            return Err(Error::ModeCountOutOfRange(n));
        }
        let side = 1usize << n;
        if let Some(bad) = lowering
            .iter()
            .find(|m| m.rows() != side || m.cols() != side)
        {
            return Err(Error::DimensionMismatch(format!(
                "lowering operator {}x{} for {n} modes (side {side})",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self {
            n_modes: n,
            lowering,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        1 << self.n_modes
    }

    pub fn lowering(&self, mode: usize) -> &Matrix {
        &self.lowering[mode]
    }

    pub fn raising(&self, mode: usize) -> Matrix {
        self.lowering[mode].adjoint()
    }

    fn check_subset(&self, subset: &ModeSet) -> Result<()> {
        if let Some(m) = subset.iter().find(|&m| m >= self.n_modes) {
            return Err(Error::ModeOutOfRange {
                mode: m,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }

    /// Parity of `subset` on the full Fock space: `diag((-1)^(sum_{j in S} b_j))`.
    pub fn parity(&self, subset: &ModeSet) -> Result<Matrix> {
        self.check_subset(subset)?;
        let n = self.n_modes;
        let signs: Vec<f64> = (0..self.dim())
            .map(|idx| {
                let odd = subset
                    .iter()
                    .filter(|&j| (idx >> (n - 1 - j)) & 1 == 1)
                    .count()
                    % 2;
                if odd == 1 {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Matrix::diag(&signs))
    }

    pub fn total_parity(&self) -> Matrix {
        self.parity(&ModeSet::all(self.n_modes))
            .expect("all modes are in range")
    }

    /// Number operator `f_j^dagger f_j`.
    pub fn number(&self, mode: usize) -> Matrix {
        &self.raising(mode) * &self.lowering[mode]
    }
}

/// Parity `Z^{(x)k}` on a local factor of `k` modes.
pub fn local_parity(k: usize) -> Matrix {
    let signs: Vec<f64> = (0..1usize << k)
        .map(|i| if i.count_ones() % 2 == 1 { -1.0 } else { 1.0 })
        .collect();
    Matrix::diag(&signs)
}

/// Verifies `{f_i, f_j^dagger} = delta_ij I` and `{f_i, f_j} = 0` for all
/// pairs `i <= j`. One check per relation and pair.
pub fn check_car(ms: &ModeSystem, tol: f64) -> Report {
    let mut report = Report::new(format!("car-check/n={}", ms.n_modes), tol, 0);
    let id = Matrix::identity(ms.dim());
    let zero = Matrix::zeros(ms.dim(), ms.dim());
    for i in 0..ms.n_modes {
        for j in i..ms.n_modes {
            let fi = ms.lowering(i);
            let fj = ms.lowering(j);
            let target = if i == j { &id } else { &zero };
            let mixed = anticommutator(fi, &ms.raising(j)).expect("square operators");
            let r1 = (&mixed - target).frobenius_norm();
            report.push(Check::new(format!("{{f{i},f{j}^+}}"), r1 <= tol, r1));
            let pure = anticommutator(fi, fj).expect("square operators");
            let r2 = pure.frobenius_norm();
            report.push(Check::new(format!("{{f{i},f{j}}}"), r2 <= tol, r2));
        }
    }
    report
}

/// `[s, Pi_subset] = 0` within `tol`.
pub fn is_ssr_state(ms: &ModeSystem, s: &QuantumState, subset: &ModeSet, tol: f64) -> Result<bool> {
    if s.side() != ms.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state side {} on a {}-mode Fock space",
            s.side(),
            ms.n_modes
        )));
    }
    let pi = ms.parity(subset)?;
    Ok(commutator_norm(s.op(), &pi)? <= tol)
}

/// Hermitian operators spanning a party's allowed local effect space.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectBasis {
    pub elements: Vec<Matrix>,
    pub labels: Vec<String>,
}

impl EffectBasis {
    pub fn new(elements: Vec<Matrix>, labels: Vec<String>) -> Result<Self> {
        if elements.len() != labels.len() || elements.is_empty() {
            return Err(Error::InvalidData(
                "basis needs one label per element".into(),
            ));
        }
        let side = elements[0].rows();
        if elements.iter().any(|e| !e.is_square() || e.rows() != side) {
            return Err(Error::DimensionMismatch(
                "basis elements differ in shape".into(),
            ));
        }
        Ok(Self { elements, labels })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Side of the operators.
    pub fn side(&self) -> usize {
        self.elements[0].rows()
    }

    /// Pauli strings on `k` qubits, `I..I` first.
    pub fn pauli(k: usize) -> Self {
        let mut elements = Vec::new();
        let mut labels = Vec::new();
        for code in 0..4usize.pow(k as u32) {
            let digits: Vec<usize> = (0..k)
                .rev()
                .map(|p| (code / 4usize.pow(p as u32)) % 4)
                .collect();
            elements.push(kron_all(
                &digits.iter().map(|&d| pauli(d)).collect::<Vec<_>>(),
            ));
            labels.push(digits.iter().map(|&d| PAULI_LABELS[d]).collect());
        }
        Self { elements, labels }
    }

    /// Hermitian basis of the operators on `k` modes that commute with
    /// `Z^{(x)k}`: one projector per basis state plus a symmetric and an
    /// antisymmetric coherence per same-parity pair.
    pub fn parity_commutant(k: usize) -> Self {
        let d = 1usize << k;
        let ket = |i: usize| format!("{i:0k$b}");
        let mut elements = Vec::new();
        let mut labels = Vec::new();
        for i in 0..d {
            for j in i..d {
                if (i.count_ones() + j.count_ones()) % 2 == 1 {
                    continue;
                }
                if i == j {
                    let mut m = Matrix::zeros(d, d);
                    m.set(i, i, c(1.0, 0.0));
                    elements.push(m);
                    labels.push(format!("|{}><{}|", ket(i), ket(i)));
                } else {
                    let mut s = Matrix::zeros(d, d);
                    s.set(i, j, c(1.0, 0.0));
                    s.set(j, i, c(1.0, 0.0));
                    elements.push(s);
                    labels.push(format!("|{}><{}|+h.c.", ket(i), ket(j)));
                    let mut a = Matrix::zeros(d, d);
                    a.set(i, j, c(0.0, -1.0));
                    a.set(j, i, c(0.0, 1.0));
                    elements.push(a);
                    labels.push(format!("-i|{}><{}|+h.c.", ket(i), ket(j)));
                }
            }
        }
        Self { elements, labels }
    }
}

/// Spanning basis for the local effects of the party holding `subset`, on
/// that party's `2^|subset|`-dimensional factor. With `ssr` set, only
/// operators commuting with the local parity are allowed; otherwise the full
/// Hermitian space (Pauli strings) is returned for comparison.
pub fn allowed_effect_basis(ms: &ModeSystem, subset: &ModeSet, ssr: bool) -> Result<EffectBasis> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    ms.check_subset(subset)?;
    let k = subset.len();
    Ok(if ssr {
        EffectBasis::parity_commutant(k)
    } else {
        EffectBasis::pauli(k)
    })
}

/// Dense Fock-space amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    n_modes: usize,
    amps: Vec<C64>,
}

impl FockVector {
    pub fn from_amplitudes(n_modes: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n_modes {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {n_modes} modes",
                amps.len()
            )));
        }
        Ok(Self { n_modes, amps })
    }

    /// Occupation basis state; `occupations[j]` is mode `j`.
    pub fn basis(occupations: &[u8]) -> Self {
        let n = occupations.len();
        let idx = occupations
            .iter()
            .enumerate()
            .map(|(j, &b)| usize::from(b & 1) << (n - 1 - j))
            .sum::<usize>();
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[idx] = c(1.0, 0.0);
        Self { n_modes: n, amps }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::basis(&vec![0; n_modes])
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn apply(&self, op: &Matrix) -> Result<Self> {
        Ok(Self {
            n_modes: self.n_modes,
            amps: op.apply(&self.amps)?,
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn neg(&self) -> Self {
        Self {
            n_modes: self.n_modes,
            amps: self.amps.iter().map(|z| -z).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &FockVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Second-quantized versus naive per-factor action of `O_B = f_B + f_B^dagger`
/// on `|1>_A ^ |1>_B`:
///
/// * `v1 = (f_B + f_B^dagger) f_A^dagger f_B^dagger |vac>`, expected `-|10>`;
/// * `v2 = |1>_A (x) (sigma^- + sigma^+)|1>_B`, expected `+|10>`.
pub fn footnote_check(ms: &ModeSystem) -> Result<Report> {
    if ms.n_modes != 2 {
        return Err(Error::WrongModeCount {
            expected: 2,
            got: ms.n_modes,
        });
    }
    let (a, b) = (0, 1);
    let o_b = ms.lowering(b) + &ms.raising(b);
    let v1 = FockVector::vacuum(2)
        .apply(&ms.raising(b))?
        .apply(&ms.raising(a))?
        .apply(&o_b)?;

    let one = [c(0.0, 0.0), c(1.0, 0.0)];
    let flipped = (&sigma_minus() + &sigma_plus()).apply(&one)?;
    let v2_amps: Vec<C64> = one
        .iter()
        .flat_map(|x| flipped.iter().map(move |y| x * y))
        .collect();
    let v2 = FockVector::from_amplitudes(2, v2_amps)?;

    let ket10 = FockVector::basis(&[1, 0]);
    let r1 = v1.max_abs_diff(&ket10.neg());
    let r2 = v2.max_abs_diff(&ket10);
    let overlap = v1.inner(&v2);
    let r3 = (overlap - c(-1.0, 0.0)).norm();
    let r4 = v1.max_abs_diff(&v2.neg());

    let mut report = Report::new("footnote", EXACT_TOL, 0);
    report
        .push(Check::new("v1 = -|10>", r1 == 0.0, r1))
        .push(Check::new("v2 = +|10>", r2 == 0.0, r2))
        .push(
            Check::new("<v1,v2> = -1", r3 <= EXACT_TOL, r3)
                .with_witness(serde_json::json!({"re": overlap.re, "im": overlap.im})),
        )
        .push(Check::new("v1 = -v2", r4 == 0.0, r4));
    Ok(report)
}
