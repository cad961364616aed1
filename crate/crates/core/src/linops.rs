//! Dense operators on small Hilbert spaces.
//!
//! [`Matrix`] is the carrier for every other module. Entries are stored
//! row-major as `Complex64` together with a [`Field`] tag; a `Real` matrix
//! keeps every imaginary part at exactly zero. Subsystem 0 is always the
//! leftmost Kronecker factor and basis states are ordered `|0..0>` first.
//!
//! The canonical inner product on operator spaces is Hilbert-Schmidt,
//! `<a, b> = Tr(a^dagger b)`.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for validity predicates.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Tolerance for identities that hold exactly by construction.
pub const EXACT_TOL: f64 = 1e-12;

pub type C64 = Complex64;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    fn join(self, other: Field) -> Field {
        if self == Field::Real && other == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }
}

/// A scalar tagged with the field it lives in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar {
    field: Field,
    value: C64,
}

impl Scalar {
    pub fn real(re: f64) -> Self {
        Self {
            field: Field::Real,
            value: c(re, 0.0),
        }
    }

    pub fn complex(re: f64, im: f64) -> Self {
        Self {
            field: Field::Complex,
            value: c(re, im),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn value(&self) -> C64 {
        self.value
    }
}

/// Dense row-major matrix over the reals or the complex numbers.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<C64>,
}

/// Wire form: `{"rows", "cols", "field", "data": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<[f64; 2]>,
}

impl From<Matrix> for MatrixJson {
    fn from(m: Matrix) -> Self {
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            field: m.field,
            data: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for Matrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let data = j.data.into_iter().map(|[re, im]| c(re, im)).collect();
        Matrix::from_parts(j.rows, j.cols, j.field, data)
    }
}

impl Matrix {
    /// Validating constructor used by every other constructor.
    pub fn from_parts(rows: usize, cols: usize, field: Field, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidData(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidData(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if field == Field::Real && data.iter().any(|z| z.im != 0.0) {
            return Err(Error::InvalidData(
                "real matrix with nonzero imaginary part".into(),
            ));
        }
        Ok(Self {
            rows,
            cols,
            field,
            data,
        })
    }

    pub fn real(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::from_parts(
            rows,
            cols,
            Field::Real,
            data.into_iter().map(|x| c(x, 0.0)).collect(),
        )
    }

    pub fn complex(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        Self::from_parts(rows, cols, Field::Complex, data)
    }

    /// Builds a matrix from a closure. The field is `Real` iff every
    /// produced entry has zero imaginary part.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        let field = if data.iter().all(|z| z.im == 0.0) {
            Field::Real
        } else {
            Field::Complex
        };
        Self {
            rows,
            cols,
            field,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                c(values[i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    /// `|v><w|` for column vectors `v`, `w`.
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn scalar(&self, i: usize, j: usize) -> Scalar {
        Scalar {
            field: self.field,
            value: self[(i, j)],
        }
    }

    /// Re-tags a real matrix as complex. No-op on complex matrices.
    pub fn to_complex(&self) -> Self {
        Self {
            field: Field::Complex,
            ..self.clone()
        }
    }

    /// Drops imaginary parts below `tol` and tags the result `Real`.
    pub fn to_real(&self, tol: f64) -> Result<Self> {
        let worst = self.data.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        if worst > tol {
            return Err(Error::InvalidData(format!(
                "imaginary part {worst:e} exceeds tolerance"
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            field: Field::Real,
            data: self.data.iter().map(|z| c(z.re, 0.0)).collect(),
        })
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj());
        out.field = self.field;
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)]);
        out.field = self.field;
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            field: self.field,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    pub fn scale_complex(&self, k: C64) -> Self {
        let mut out = Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * k);
        if self.field == Field::Complex {
            out.field = Field::Complex;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = vec![c(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == c(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let out = &mut data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(Matrix {
            rows: self.rows,
            cols: other.cols,
            field: self.field.join(other.field),
            data,
        })
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(C64, C64) -> C64) -> Result<Matrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field.join(other.field),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn try_add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Writes one entry; a nonzero imaginary part promotes the tag to `Complex`.
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        if value.im != 0.0 {
            self.field = Field::Complex;
        }
        self.data[i * self.cols + j] = value;
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }
}

// Operator sugar. These panic on shape mismatch; use the `try_*` forms
// where shapes come from input.
impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        self.try_add(rhs).expect("shape mismatch in add")
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        self.try_sub(rhs).expect("shape mismatch in sub")
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} ({:?})", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                if self.field == Field::Real {
                    write!(f, " {:>8.4}", z.re)?;
                } else {
                    write!(f, " {:>8.4}{:+.4}i", z.re, z.im)?;
                }
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

pub fn sigma_x() -> Matrix {
    Matrix::real(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn sigma_y() -> Matrix {
    Matrix::complex(
        2,
        2,
        vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
    )
    .unwrap()
}

pub fn sigma_z() -> Matrix {
    Matrix::diag(&[1.0, -1.0])
}

/// `sigma^- = |0><1|`, the single-mode lowering operator.
pub fn sigma_minus() -> Matrix {
    Matrix::real(2, 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap()
}

pub fn sigma_plus() -> Matrix {
    Matrix::real(2, 2, vec![0.0, 0.0, 1.0, 0.0]).unwrap()
}

/// Pauli matrix by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(k: usize) -> Matrix {
    match k {
        0 => Matrix::identity(2),
        1 => sigma_x(),
        2 => sigma_y(),
        3 => sigma_z(),
        _ => panic!("pauli index {k} out of range"),
    }
}

pub const PAULI_LABELS: [&str; 4] = ["I", "X", "Y", "Z"];

/// Kronecker product; `a` is the leftmost factor.
pub fn kron(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.field != b.field {
        return Err(Error::FieldMismatch(a.field, b.field));
    }
    let (rows, cols) = (a.rows * b.rows, a.cols * b.cols);
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let (ia, ib) = (i / b.rows, i % b.rows);
        for j in 0..cols {
            let (ja, jb) = (j / b.cols, j % b.cols);
            data.push(a.data[ia * a.cols + ja] * b.data[ib * b.cols + jb]);
        }
    }
    Ok(Matrix {
        rows,
        cols,
        field: a.field,
        data,
    })
}

/// Kronecker product of several factors, promoting to complex when the
/// factors disagree on field.
pub fn kron_all(factors: &[Matrix]) -> Matrix {
    let any_complex = factors.iter().any(|m| m.field == Field::Complex);
    let lift = |m: &Matrix| {
        if any_complex {
            m.to_complex()
        } else {
            m.clone()
        }
    };
    let mut iter = factors.iter();
    let first = lift(iter.next().expect("kron_all needs at least one factor"));
    iter.fold(first, |acc, m| {
        kron(&acc, &lift(m)).expect("fields agree after lifting")
    })
}

/// `Tr(a^dagger b)`.
pub fn hs_inner(a: &Matrix, b: &Matrix) -> C64 {
    assert_eq!(
        (a.rows, a.cols),
        (b.rows, b.cols),
        "hs_inner shape mismatch"
    );
    a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum()
}

/// Frobenius norm of `ab - ba`.
pub fn commutator_norm(a: &Matrix, b: &Matrix) -> Result<f64> {
    if !a.is_square() || !b.is_square() || a.rows != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "commutator of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok((&(a * b) - &(b * a)).frobenius_norm())
}

/// `ab + ba`.
pub fn anticommutator(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.matmul(b)?.try_add(&b.matmul(a)?)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn herm_eigen(m: &Matrix) -> Result<Vec<f64>> {
    Ok(herm_eigh(m)?.0)
}

/// Ascending eigenvalues and matching orthonormal eigenvectors of a
/// Hermitian matrix.
pub fn herm_eigh(m: &Matrix) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let scale = m.frobenius_norm().max(1.0);
    let defect = m.hermiticity_defect();
    if defect > DEFAULT_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let dm = m.to_dmatrix();
    let sym = (&dm + dm.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..m.rows).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    Ok((values, vectors))
}

/// Hermitian, PSD and unit trace, each within `tol`.
pub fn is_density(m: &Matrix, tol: f64) -> bool {
    if !m.is_square() || m.hermiticity_defect() > tol {
        return false;
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return false;
    }
    match herm_eigen(m) {
        Ok(ev) => ev[0] >= -tol,
        Err(_) => false,
    }
}

/// Spectrum inside `[-tol, 1 + tol]`.
pub fn is_effect(m: &Matrix, tol: f64) -> bool {
    if !m.is_square() || m.hermiticity_defect() > tol {
        return false;
    }
    match herm_eigen(m) {
        Ok(ev) => ev[0] >= -tol && ev[ev.len() - 1] <= 1.0 + tol,
        Err(_) => false,
    }
}

/// Clips negative eigenvalues and renormalizes to unit trace.
pub fn project_to_density(m: &Matrix) -> Result<Matrix> {
    let (values, vectors) = herm_eigh(m)?;
    let n = m.rows;
    let mut out = Matrix::zeros(n, n);
    let mut total = 0.0;
    for (lam, v) in values.iter().zip(&vectors) {
        if *lam > 0.0 {
            out = &out + &Matrix::outer(v, v).scale(*lam);
            total += lam;
        }
    }
    if total <= 0.0 {
        return Err(Error::InvalidState(
            "no positive spectrum to project onto".into(),
        ));
    }
    let out = out.scale(1.0 / total);
    // Keep the real tag when the input was real and the result stayed real.
    if m.field == Field::Real {
        out.to_real(EXACT_TOL).or(Ok(out))
    } else {
        Ok(out)
    }
}

/// Density operator with subsystem layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    op: Matrix,
    dims: Vec<usize>,
}

impl QuantumState {
    pub fn new(op: Matrix, dims: Vec<usize>) -> Result<Self> {
        Self::with_tol(op, dims, DEFAULT_TOL)
    }

    pub fn with_tol(op: Matrix, dims: Vec<usize>, tol: f64) -> Result<Self> {
        if !op.is_square() {
            return Err(Error::NotSquare {
                rows: op.rows,
                cols: op.cols,
            });
        }
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidState(format!("bad subsystem dims {dims:?}")));
        }
        let total: usize = dims.iter().product();
        if total != op.rows {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} multiply to {total}, operator side is {}",
                op.rows
            )));
        }
        if !is_density(&op, tol) {
            return Err(Error::InvalidState("not a density operator".into()));
        }
        Ok(Self { op, dims })
    }

    /// Single-subsystem state.
    pub fn single(op: Matrix) -> Result<Self> {
        let n = op.rows;
        Self::new(op, vec![n])
    }

    pub fn pure(psi: &[C64], dims: Vec<usize>) -> Result<Self> {
        Self::new(Matrix::outer(psi, psi), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self {
            op: Matrix::identity(n).scale(1.0 / n as f64),
            dims,
        }
    }

    pub fn op(&self) -> &Matrix {
        &self.op
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.op.rows
    }

    pub fn into_op(self) -> Matrix {
        self.op
    }

    /// Product state `self (x) other`.
    pub fn tensor(&self, other: &QuantumState) -> QuantumState {
        let op = kron_all(&[self.op.clone(), other.op.clone()]);
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        QuantumState { op, dims }
    }
}

/// Hermitian operator with spectrum in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    op: Matrix,
}

impl Effect {
    pub fn new(op: Matrix, tol: f64) -> Result<Self> {
        if !is_effect(&op, tol) {
            return Err(Error::InvalidData("operator is not an effect".into()));
        }
        Ok(Self { op })
    }

    pub fn op(&self) -> &Matrix {
        &self.op
    }

    pub fn probability(&self, s: &QuantumState) -> f64 {
        hs_inner(&self.op, s.op()).re
    }
}

/// Traces out every subsystem except `keep`. Works on any square operator
/// whose side equals the product of `dims`.
pub fn partial_trace_op(m: &Matrix, dims: &[usize], keep: usize) -> Result<Matrix> {
    if keep >= dims.len() {
        return Err(Error::SubsystemOutOfRange {
            index: keep,
            count: dims.len(),
        });
    }
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows != total {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} vs dims {dims:?}",
            m.rows, m.cols
        )));
    }
    let dk = dims[keep];
    let left: usize = dims[..keep].iter().product();
    let right: usize = dims[keep + 1..].iter().product();
    let mut data = vec![c(0.0, 0.0); dk * dk];
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = c(0.0, 0.0);
            for l in 0..left {
                for r in 0..right {
                    let i = (l * dk + a) * right + r;
                    let j = (l * dk + b) * right + r;
                    acc += m[(i, j)];
                }
            }
            data[a * dk + b] = acc;
        }
    }
    Matrix::from_parts(dk, dk, m.field, data)
}

/// Marginal state on subsystem `keep`.
pub fn partial_trace(s: &QuantumState, keep: usize) -> Result<QuantumState> {
    if s.dims.len() < 2 {
        return Err(Error::InvalidState(
            "partial trace needs at least two subsystems".into(),
        ));
    }
    let op = partial_trace_op(&s.op, &s.dims, keep)?;
    let d = op.rows;
    Ok(QuantumState { op, dims: vec![d] })
}

/// Transposes the second factor of a bipartite operator with dims `(da, db)`.
pub fn partial_transpose_b(m: &Matrix, da: usize, db: usize) -> Matrix {
    Matrix::from_fn(da * db, da * db, |i, j| {
        let (ia, ib) = (i / db, i % db);
        let (ja, jb) = (j / db, j % db);
        m[(ia * db + jb, ja * db + ib)]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn kron_examples() {
        let i4 = kron(&Matrix::identity(2), &Matrix::identity(2)).unwrap();
        assert_eq!(i4, Matrix::identity(4));

        let p = Matrix::diag(&[1.0, 0.0]);
        assert_eq!(kron(&p, &p).unwrap(), Matrix::diag(&[1.0, 0.0, 0.0, 0.0]));

        // Hand expansion: (1,-1) (x) (1,-1) = (1,-1,-1,1).
        let zz = kron(&sigma_z(), &sigma_z()).unwrap();
        assert_eq!(zz, Matrix::diag(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_rejects_field_mismatch() {
        let err = kron(&sigma_x(), &sigma_y()).unwrap_err();
        assert_eq!(err, Error::FieldMismatch(Field::Real, Field::Complex));
        assert!(kron(&sigma_x().to_complex(), &sigma_y()).is_ok());
    }

    #[test]
    fn partial_trace_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let bell = QuantumState::pure(&phi, vec![2, 2]).unwrap();
        let a = partial_trace(&bell, 0).unwrap();
        assert!(a.op().max_abs_diff(&Matrix::identity(2).scale(0.5)) < EXACT_TOL);

        let ra = QuantumState::single(Matrix::diag(&[0.3, 0.7])).unwrap();
        let rb = QuantumState::single(Matrix::diag(&[0.9, 0.1])).unwrap();
        let prod = ra.tensor(&rb);
        assert!(partial_trace(&prod, 0).unwrap().op().max_abs_diff(ra.op()) < EXACT_TOL);
        assert!(partial_trace(&prod, 1).unwrap().op().max_abs_diff(rb.op()) < EXACT_TOL);
    }

    #[test]
    fn partial_trace_three_parties() {
        let ra = Matrix::diag(&[0.25, 0.75]);
        let rb = Matrix::diag(&[0.5, 0.2, 0.3]);
        let rc = Matrix::diag(&[0.6, 0.4]);
        let s = QuantumState::new(kron_all(&[ra, rb.clone(), rc]), vec![2, 3, 2]).unwrap();
        assert!(partial_trace(&s, 1).unwrap().op().max_abs_diff(&rb) < EXACT_TOL);
    }

    #[test]
    fn partial_trace_errors() {
        let s = QuantumState::maximally_mixed(vec![2, 2]);
        assert_eq!(
            partial_trace(&s, 2).unwrap_err(),
            Error::SubsystemOutOfRange { index: 2, count: 2 }
        );
        let single = QuantumState::maximally_mixed(vec![4]);
        assert!(partial_trace(&single, 0).is_err());
    }

    #[test]
    fn density_predicate() {
        assert!(is_density(&Matrix::identity(4).scale(0.25), DEFAULT_TOL));
        assert!(!is_density(&sigma_z(), DEFAULT_TOL));
        assert!(!is_density(&Matrix::identity(2), DEFAULT_TOL));
        assert!(!is_density(&sigma_minus(), DEFAULT_TOL));
    }

    #[test]
    fn effect_predicate() {
        assert!(is_effect(&Matrix::diag(&[1.0, 0.0]), DEFAULT_TOL));
        assert!(!is_effect(&Matrix::identity(2).scale(2.0), DEFAULT_TOL));
        let pi = sigma_z();
        let half = (&Matrix::identity(2) + &pi).scale(0.5);
        assert!(is_effect(&half, DEFAULT_TOL));
        assert!(Effect::new(sigma_x(), DEFAULT_TOL).is_err());
    }

    #[test]
    fn eigen_examples() {
        let ev = herm_eigen(&Matrix::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(ev, vec![1.0, 2.0, 3.0]);
        let ev = herm_eigen(&sigma_x()).unwrap();
        assert!(close(ev[0], -1.0, 1e-12) && close(ev[1], 1.0, 1e-12));
        assert!(matches!(
            herm_eigen(&sigma_minus()),
            Err(Error::NotHermitian(_))
        ));
        assert!(matches!(
            herm_eigen(&Matrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn commutator_examples() {
        let pi = sigma_z();
        assert_eq!(commutator_norm(&pi, &pi).unwrap(), 0.0);
        // [X, Z] = -2i Y, Frobenius norm 2 * sqrt(2).
        let n = commutator_norm(&sigma_x(), &sigma_z()).unwrap();
        assert!(close(n, 2.0 * 2f64.sqrt(), 1e-12));
        let a = Matrix::diag(&[0.3, -1.2]);
        let b = Matrix::diag(&[5.0, 7.5]);
        assert_eq!(commutator_norm(&a, &b).unwrap(), 0.0);
        assert!(commutator_norm(&a, &Matrix::identity(3)).is_err());
    }

    #[test]
    fn json_shape() {
        let m = sigma_y();
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["rows"], 2);
        assert_eq!(v["field"], "complex");
        assert_eq!(v["data"][1], serde_json::json!([0.0, -1.0]));
        let back: Matrix = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_rejects_inconsistent_input() {
        let bad = r#"{"rows":2,"cols":2,"field":"real","data":[[1,0],[0,1],[0,0],[1,0]]}"#;
        assert!(serde_json::from_str::<Matrix>(bad).is_err());
        let short = r#"{"rows":2,"cols":2,"field":"real","data":[[1,0]]}"#;
        assert!(serde_json::from_str::<Matrix>(short).is_err());
    }

    #[test]
    fn partial_transpose_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let pt = partial_transpose_b(&Matrix::outer(&phi, &phi), 2, 2);
        let ev = herm_eigen(&pt).unwrap();
        assert!(close(ev[0], -0.5, 1e-12));
    }
}
