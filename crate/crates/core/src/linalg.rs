//! Dense complex matrices and the handful of spectral routines the rest of
//! the crate is built on: operator norms, Hermitian eigendecompositions,
//! positive square roots, inverses and Kronecker products.
//!
//! `ComplexMatrix` is a thin newtype over `nalgebra::DMatrix<Complex64>`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative asymmetry accepted by [`herm_eig`] (inputs are symmetrized first).
pub const HERM_TOL: f64 = 1e-9;
/// Negative eigenvalues above `-PSD_TOL * max(1, ||M||)` are treated as roundoff.
pub const PSD_TOL: f64 = 1e-10;
/// Smallest singular value, relative to the norm, below which a matrix is singular.
pub const SINGULAR_TOL: f64 = 1e-13;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

/// Eigenvalues in ascending order with matching orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl ComplexMatrix {
    pub fn from_na(inner: DMatrix<Complex64>) -> Self {
        ComplexMatrix(inner)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix(DMatrix::identity(n, n))
    }

    /// 1x1 matrix holding `z`.
    pub fn scalar(z: Complex64) -> Self {
        ComplexMatrix(DMatrix::from_element(1, 1, z))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        ComplexMatrix(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::BadInput("non-finite matrix entry".into()));
        }
        Ok(ComplexMatrix(DMatrix::from_row_slice(rows, cols, entries)))
    }

    /// Convenience constructor from real rows; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex64::new(values[i], 0.0) } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.0[(i, j)] = z;
    }

    pub fn as_na(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_na(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix(self.0.map(|z| z * s))
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        ComplexMatrix(self.0.map(|z| z * s))
    }

    /// (M + M*) / 2
    pub fn hermitian_part(&self) -> Self {
        ComplexMatrix((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0.iter().zip(other.0.iter()).fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// Matrix power by repeated squaring; `self` must be square.
    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square());
        let mut result = Self::identity(self.rows());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Sub-block of `rows x cols` starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        ComplexMatrix(self.0.view((r0, c0), (rows, cols)).into_owned())
    }

    /// Column `j` as a vector of entries.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    /// Quadratic form <M v, v>.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Complex64 {
        assert_eq!(v.len(), self.cols());
        let mut acc = ZERO;
        for i in 0..self.rows() {
            let mut row = ZERO;
            for (j, vj) in v.iter().enumerate() {
                row += self.0[(i, j)] * vj;
            }
            acc += v[i].conj() * row;
        }
        acc
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }

    pub fn op_norm(&self) -> f64 {
        op_norm(self)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{:?}", self.0.shape())?;
        for i in 0..self.rows() {
            write!(f, "\n  [")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            write!(f, " ]")?;
        }
        Ok(())
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 += &rhs.0;
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

/// Largest singular value. The empty matrix has norm 0.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    m.0.clone().singular_values().max()
}

/// Hermitian eigendecomposition, eigenvalues ascending.
///
/// The input is symmetrized as (M + M*)/2 before solving.
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermEig> {
    let h = checked_hermitian(m)?;
    let n = h.rows();
    if n == 0 {
        return Ok(HermEig { values: vec![], vectors: ComplexMatrix::zeros(0, 0) });
    }
    let eig = SymmetricEigen::try_new(h.0, EIG_EPS, EIG_MAX_ITER).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermEig { values, vectors })
}

/// Ascending eigenvalues of a Hermitian matrix without eigenvectors.
pub fn herm_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let h = checked_hermitian(m)?;
    if h.rows() == 0 {
        return Ok(vec![]);
    }
    let mut values: Vec<f64> = h.0.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn checked_hermitian(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Hermitian input must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.max_abs();
    if scale > 0.0 {
        let asym = m.max_abs_diff(&m.adjoint()) / scale;
        if asym > HERM_TOL {
            return Err(Error::NotHermitian(asym));
        }
    }
    Ok(m.hermitian_part())
}

/// Positive square root of a PSD matrix; roundoff-negative eigenvalues are clamped to 0.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = herm_eig(m)?;
    let scale = eig.values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if let Some(&min) = eig.values.first() {
        if min < -PSD_TOL * scale {
            return Err(Error::NotPsd(min));
        }
    }
    let roots: Vec<f64> = eig.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok(spectral_apply(&eig.vectors, &roots))
}

/// V diag(values) V*
pub fn spectral_apply(vectors: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    let n = vectors.rows();
    let scaled = ComplexMatrix::from_fn(n, values.len(), |i, j| vectors.get(i, j) * values[j]);
    (&scaled * &vectors.adjoint()).hermitian_part()
}

/// Matrix inverse; fails when the smallest singular value is below
/// `SINGULAR_TOL * ||M||`.
pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "inverse of non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() == 0 {
        return Ok(m.clone());
    }
    let sv = m.0.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if smax == 0.0 || smin <= SINGULAR_TOL * smax {
        return Err(Error::Singular(smin));
    }
    m.0.clone().try_inverse().map(ComplexMatrix).ok_or(Error::Singular(smin))
}

/// Lower Cholesky factor of a Hermitian positive definite matrix; `None` when a
/// pivot is not strictly positive. Only the lower triangle of `m` is read.
pub fn cholesky_lower(m: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    let n = m.nrows();
    let mut l = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if !(diag > 0.0) {
            return None;
        }
        let root = diag.sqrt();
        l[(j, j)] = Complex64::new(root, 0.0);
        for i in j + 1..n {
            let mut acc = m[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / root;
        }
    }
    Some(l)
}

/// Solves `L L* x = b` for a lower Cholesky factor `L`.
pub fn cholesky_solve(l: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let y = l.solve_lower_triangular(b).expect("Cholesky factor has a positive diagonal");
    l.adjoint().solve_upper_triangular(&y).expect("Cholesky factor has a positive diagonal")
}

/// True when every eigenvalue of the Hermitian matrix `m` lies in `[lo, hi]`,
/// decided by two Cholesky factorizations of the shifted matrices (strict
/// inequalities up to roundoff).
pub fn spectrum_within(m: &ComplexMatrix, lo: f64, hi: f64) -> bool {
    let n = m.rows();
    let h = m.hermitian_part();
    let shift = |s: f64, sign: f64| {
        DMatrix::from_fn(n, n, |i, j| {
            let v = h.get(i, j) * sign;
            if i == j { v - Complex64::new(s * sign, 0.0) } else { v }
        })
    };
    cholesky_lower(&shift(lo, 1.0)).is_some() && cholesky_lower(&shift(hi, -1.0)).is_some()
}

/// Kronecker product with index convention (i_A, i_B) -> i_A * rows(B) + i_B.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Power-iteration estimate of the largest singular value (used as a
/// cross-check of the SVD route).
pub fn op_norm_power(m: &ComplexMatrix, iterations: usize) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let gram = &m.adjoint() * m;
    let n = gram.cols();
    let mut v = DMatrix::from_fn(n, 1, |i, _| Complex64::new(1.0 + (i as f64) * 0.1, 0.05 * i as f64));
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let w = &gram.0 * &v;
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = norm;
        v = w / Complex64::new(norm, 0.0);
    }
    estimate.sqrt()
}
