//! Operators on `C^N` (by kernel) and functions on the discrete phase space.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_len, Result, TfError};
use crate::roots::wrap;
use crate::signal::Signal;

/// Linear operator on `C^N`, stored as its kernel `κ(t, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinOp {
    kernel: DMatrix<Complex64>,
}

impl LinOp {
    pub fn new(kernel: DMatrix<Complex64>) -> Result<Self> {
        if kernel.nrows() != kernel.ncols() {
            return Err(TfError::DimensionMismatch {
                expected: kernel.nrows(),
                found: kernel.ncols(),
            });
        }
        if kernel.nrows() == 0 {
            return Err(TfError::InvalidParameter("operator dimension must be positive".into()));
        }
        if let Some(index) = kernel.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TfError::NonFinite { index });
        }
        Ok(LinOp { kernel })
    }

    pub(crate) fn from_matrix_unchecked(kernel: DMatrix<Complex64>) -> Self {
        LinOp { kernel }
    }

    /// Build from a row-major list of entries.
    pub fn from_row_major(n: usize, entries: &[Complex64]) -> Result<Self> {
        check_len(n * n, entries.len())?;
        LinOp::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn identity(n: usize) -> Self {
        LinOp::from_matrix_unchecked(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        LinOp::from_matrix_unchecked(DMatrix::zeros(n, n))
    }

    /// The rank-one operator `f ↦ ⟨f, g⟩ h`.
    pub fn rank_one(g: &Signal, h: &Signal) -> Result<Self> {
        check_len(g.len(), h.len())?;
        let n = g.len();
        Ok(LinOp::from_matrix_unchecked(DMatrix::from_fn(n, n, |t, s| {
            h[t] * g[s].conj()
        })))
    }

    pub fn n(&self) -> usize {
        self.kernel.nrows()
    }

    pub fn kernel(&self) -> &DMatrix<Complex64> {
        &self.kernel
    }

    pub fn into_kernel(self) -> DMatrix<Complex64> {
        self.kernel
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        check_len(self.n(), f.len())?;
        let v = DVector::from_column_slice(f.as_slice());
        Ok(Signal::from_vec_unchecked((&self.kernel * v).as_slice().to_vec()))
    }

    pub fn adjoint(&self) -> LinOp {
        LinOp::from_matrix_unchecked(self.kernel.adjoint())
    }

    /// Operator product `self · rhs`.
    pub fn compose(&self, rhs: &LinOp) -> Result<LinOp> {
        check_len(self.n(), rhs.n())?;
        Ok(LinOp::from_matrix_unchecked(&self.kernel * &rhs.kernel))
    }

    pub fn add(&self, rhs: &LinOp) -> Result<LinOp> {
        check_len(self.n(), rhs.n())?;
        Ok(LinOp::from_matrix_unchecked(&self.kernel + &rhs.kernel))
    }

    pub fn sub(&self, rhs: &LinOp) -> Result<LinOp> {
        check_len(self.n(), rhs.n())?;
        Ok(LinOp::from_matrix_unchecked(&self.kernel - &rhs.kernel))
    }

    pub fn scale(&self, c: Complex64) -> LinOp {
        LinOp::from_matrix_unchecked(&self.kernel * c)
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sqr().sqrt()
    }

    pub fn hs_norm_sqr(&self) -> f64 {
        self.kernel.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &LinOp) -> f64 {
        self.kernel
            .iter()
            .zip(other.kernel.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

/// Hilbert-Schmidt inner product `Σ κ_A(t,s)·conj(κ_B(t,s))`.
pub fn hs_inner(a: &LinOp, b: &LinOp) -> Result<Complex64> {
    check_len(a.n(), b.n())?;
    Ok(a.kernel.iter().zip(b.kernel.iter()).map(|(x, y)| x * y.conj()).sum())
}

/// Function on `ℤ_N × ℤ_N`, indexed by (lag, Doppler). Indices wrap.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap {
    data: DMatrix<Complex64>,
}

impl PhaseMap {
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(TfError::DimensionMismatch {
                expected: data.nrows(),
                found: data.ncols(),
            });
        }
        if data.nrows() == 0 {
            return Err(TfError::InvalidParameter("phase map dimension must be positive".into()));
        }
        if let Some(index) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TfError::NonFinite { index });
        }
        Ok(PhaseMap { data })
    }

    pub(crate) fn from_matrix_unchecked(data: DMatrix<Complex64>) -> Self {
        PhaseMap { data }
    }

    pub fn from_row_major(n: usize, entries: &[Complex64]) -> Result<Self> {
        check_len(n * n, entries.len())?;
        PhaseMap::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn zeros(n: usize) -> Self {
        PhaseMap::from_matrix_unchecked(DMatrix::zeros(n, n))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        PhaseMap::from_matrix_unchecked(DMatrix::from_fn(n, n, f))
    }

    /// Unit mass at `(lag, doppler)`.
    pub fn delta(n: usize, lag: i64, doppler: i64) -> Self {
        let mut m = PhaseMap::zeros(n);
        m.data[(wrap(lag, n), wrap(doppler, n))] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<Complex64> {
        self.data
    }

    #[inline]
    pub fn get(&self, lag: i64, doppler: i64) -> Complex64 {
        let n = self.n();
        self.data[(wrap(lag, n), wrap(doppler, n))]
    }

    #[inline]
    pub fn at(&self, lag: usize, doppler: usize) -> Complex64 {
        self.data[(lag, doppler)]
    }

    pub fn set(&mut self, lag: i64, doppler: i64, value: Complex64) {
        let n = self.n();
        self.data[(wrap(lag, n), wrap(doppler, n))] = value;
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &PhaseMap) -> Result<Complex64> {
        check_len(self.n(), other.n())?;
        Ok(self.data.iter().zip(other.data.iter()).map(|(x, y)| x * y.conj()).sum())
    }

    pub fn scale(&self, c: Complex64) -> PhaseMap {
        PhaseMap::from_matrix_unchecked(&self.data * c)
    }

    pub fn add(&self, other: &PhaseMap) -> Result<PhaseMap> {
        check_len(self.n(), other.n())?;
        Ok(PhaseMap::from_matrix_unchecked(&self.data + &other.data))
    }

    pub fn sub(&self, other: &PhaseMap) -> Result<PhaseMap> {
        check_len(self.n(), other.n())?;
        Ok(PhaseMap::from_matrix_unchecked(&self.data - &other.data))
    }

    /// Pointwise product.
    pub fn mul(&self, other: &PhaseMap) -> Result<PhaseMap> {
        check_len(self.n(), other.n())?;
        Ok(PhaseMap::from_matrix_unchecked(self.data.component_mul(&other.data)))
    }

    pub fn conj(&self) -> PhaseMap {
        PhaseMap::from_matrix_unchecked(self.data.map(|z| z.conj()))
    }

    pub fn max_abs_diff(&self, other: &PhaseMap) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest centred box `[-t0, t0] × [-ξ0, ξ0]` containing every entry
    /// with modulus above `rel_tol · max|F|`.
    pub fn support_box(&self, rel_tol: f64) -> (usize, usize) {
        let n = self.n();
        let peak = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return (0, 0);
        }
        let centred = |i: usize| if i <= n / 2 { i } else { n - i };
        let mut box_ = (0, 0);
        for lag in 0..n {
            for dop in 0..n {
                if self.data[(lag, dop)].norm() > rel_tol * peak {
                    box_.0 = box_.0.max(centred(lag));
                    box_.1 = box_.1.max(centred(dop));
                }
            }
        }
        box_
    }
}
