use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use num_complex::Complex64;

use super::LinalgError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix.
///
/// Entries are exchanged in row-major order at the API boundary; storage is
/// whatever the decomposition backend prefers.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: Mat<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::EntryCount {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self::from_fn(rows, cols, |i, j| entries[i * cols + j]))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: Mat::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self {
            inner: Mat::from_fn(rows, cols, f),
        }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Stacks vectors as columns. All vectors must share one dimension.
    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self, LinalgError> {
        let rows = columns.first().map_or(0, ComplexVector::dim);
        if let Some(bad) = columns.iter().find(|c| c.dim() != rows) {
            return Err(LinalgError::ShapeMismatch {
                op: "from_columns",
                left: (rows, 1),
                right: (bad.dim(), 1),
            });
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|z| z.is_finite())
    }

    /// Row-major iterator over all entries.
    pub fn entries(&self) -> impl Iterator<Item = Complex64> + '_ {
        let (r, c) = self.shape();
        (0..r).flat_map(move |i| (0..c).map(move |j| self.inner[(i, j)]))
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        self.entries().collect()
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::from_vec_unchecked((0..self.rows()).map(|i| self.inner[(i, j)]).collect())
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows().min(self.cols()))
            .map(|i| self.inner[(i, i)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint().to_owned(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose().to_owned(),
        }
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows(), self.cols(), |i, j| self.inner[(i, j)].conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_fn(self.rows(), self.cols(), |i, j| self.inner[(i, j)] * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols())
            .map(|j| (0..self.rows()).map(|i| self.inner[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ‖A − A†‖_F.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.rows();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.inner[(i, j)] - self.inner[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols() != rhs.rows() {
            return Err(LinalgError::ShapeMismatch {
                op: "matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Mat::zeros(self.rows(), rhs.cols());
        matmul(&mut out, Accum::Replace, &self.inner, &rhs.inner, ONE, Par::Seq);
        Ok(Self { inner: out })
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> Result<ComplexVector, LinalgError> {
        if self.cols() != v.dim() {
            return Err(LinalgError::ShapeMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (v.dim(), 1),
            });
        }
        let out: Vec<Complex64> = (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| self.inner[(i, j)] * v[j])
                    .sum()
            })
            .collect();
        Ok(ComplexVector::from_vec_unchecked(out))
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (r1, c1) = self.shape();
        let (r2, c2) = rhs.shape();
        Self::from_fn(r1 * r2, c1 * c2, |i, j| {
            self.inner[(i / r2, j / c2)] * rhs.inner[(i % r2, j % c2)]
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &Self,
        op: &'static str,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self, LinalgError> {
        if self.shape() != rhs.shape() {
            return Err(LinalgError::ShapeMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self::from_fn(self.rows(), self.cols(), |i, j| {
            f(self.inner[(i, j)], rhs.inner[(i, j)])
        }))
    }

    pub(crate) fn as_faer(&self) -> MatRef<'_, Complex64> {
        self.inner.as_ref()
    }

    pub(crate) fn from_faer(inner: Mat<Complex64>) -> Self {
        Self { inner }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.inner[idx]
    }
}

// Operator sugar panics on shape mismatch; fallible callers use the `try_*`
// and `matmul` methods.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix shapes must agree")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix shapes must agree")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("inner dimensions must agree")
    }
}

impl Mul<Complex64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Complex64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows().min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols().min(8) {
                let z = self.inner[(i, j)];
                write!(f, "{:+.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Dense complex column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self, LinalgError> {
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![ZERO; dim],
        }
    }

    /// Unit vector `e_k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[k] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.entries.iter()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Unit-norm copy; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale_real(1.0 / n))
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &Self) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += c * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.entries[i]
    }
}

impl Add for &ComplexVector {
    type Output = ComplexVector;

    fn add(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimensions must agree");
        let mut out = self.clone();
        out.axpy(ONE, rhs);
        out
    }
}

impl Sub for &ComplexVector {
    type Output = ComplexVector;

    fn sub(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimensions must agree");
        let mut out = self.clone();
        out.axpy(-ONE, rhs);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn construction_checks_length_and_finiteness() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![ONE; 3]),
            Err(LinalgError::EntryCount { expected: 4, got: 3 })
        ));
        assert!(matches!(
            ComplexMatrix::new(1, 2, vec![ONE, c(f64::NAN, 0.0)]),
            Err(LinalgError::NonFinite)
        ));
        assert!(ComplexVector::new(vec![c(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn row_major_round_trip() {
        let entries: Vec<_> = (0..6).map(|k| c(k as f64, -(k as f64))).collect();
        let m = ComplexMatrix::new(2, 3, entries.clone()).unwrap();
        assert_eq!(m[(1, 0)], entries[3]);
        assert_eq!(m.to_row_major(), entries);
    }

    #[test]
    fn kron_matches_block_definition() {
        let a = ComplexMatrix::new(2, 2, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)])
            .unwrap();
        let b = ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let k = a.kron(&b);
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k[(0, 1)], c(1.0, 0.0));
        assert_eq!(k[(1, 2)], c(2.0, 0.0));
        assert_eq!(k[(3, 2)], c(4.0, 0.0));
        assert_eq!(k[(2, 2)], ZERO);
    }

    #[test]
    fn matmul_rejects_mismatched_shapes() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(a.matmul(&a).is_err());
        let v = ComplexVector::zeros(2);
        assert!(a.mul_vec(&v).is_err());
    }

    #[test]
    fn inner_product_is_antilinear_in_first_argument() {
        let a = ComplexVector::new(vec![c(0.0, 1.0), ONE]).unwrap();
        let b = ComplexVector::new(vec![ONE, ONE]).unwrap();
        assert_eq!(a.inner(&b), c(1.0, -1.0));
        assert_eq!(b.inner(&a), c(1.0, 1.0));
    }
}
