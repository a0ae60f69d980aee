//! Gabor frame operator, frame bounds and the canonical dual window.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, TfError};
use crate::lattice::TfLattice;
use crate::signal::{Signal, Window};

/// Condition number above which a frame operator counts as singular.
pub const FRAME_CONDITION_LIMIT: f64 = 1e12;

/// Spectrum summary of a Gabor frame operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn condition(&self) -> f64 {
        if self.lower <= 0.0 {
            f64::INFINITY
        } else {
            self.upper / self.lower
        }
    }

    pub fn is_frame(&self) -> bool {
        self.lower > 0.0 && self.condition() <= FRAME_CONDITION_LIMIT
    }
}

/// Dense frame operator `S = Σ_λ π(λ)g ⊗ (π(λ)g)*`.
///
/// Only entries with `t ≡ s (mod N/b)` are nonzero:
/// `S(t,s) = (N/b) Σ_m g(t−ma)·conj(g(s−ma))`.
pub fn frame_operator(g: &Signal, lat: &TfLattice) -> Result<DMatrix<Complex64>> {
    lat.check_n(g.len())?;
    let n = lat.n();
    let k = lat.k_count();
    let a = lat.a();
    let scale = k as f64;
    let mut s = DMatrix::zeros(n, n);
    for t in 0..n {
        for sidx in (t % k..n).step_by(k) {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..lat.m_count() {
                let shift = m * a;
                acc += g[(t + n - shift) % n] * g[(sidx + n - shift) % n].conj();
            }
            s[(t, sidx)] = acc * scale;
        }
    }
    Ok(s)
}

fn hermitian_eigen(s: DMatrix<Complex64>) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    // symmetrize against rounding before the Hermitian solver
    let sym = (&s + s.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(sym)
}

pub fn frame_bounds(g: &Signal, lat: &TfLattice) -> Result<FrameBounds> {
    let eig = hermitian_eigen(frame_operator(g, lat)?);
    let lower = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let upper = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(FrameBounds { lower, upper })
}

/// Canonical dual window `S⁻¹g`.
pub fn dual_window(g: &Window, lat: &TfLattice) -> Result<Window> {
    lat.check_n(g.len())?;
    if lat.a() * lat.b() > lat.n() {
        // fewer than N atoms cannot span C^N
        return Err(TfError::FrameFailure {
            smallest_eigenvalue: 0.0,
            condition: f64::INFINITY,
        });
    }
    let eig = hermitian_eigen(frame_operator(g.signal(), lat)?);
    let lower = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let upper = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bounds = FrameBounds { lower, upper };
    if !bounds.is_frame() {
        return Err(TfError::FrameFailure {
            smallest_eigenvalue: lower,
            condition: bounds.condition(),
        });
    }
    let u = &eig.eigenvectors;
    let gv = DVector::from_column_slice(g.signal().as_slice());
    let mut coeffs = u.adjoint() * gv;
    for (c, lam) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c /= *lam;
    }
    let h = u * coeffs;
    Window::new(
        Signal::new(h.as_slice().to_vec())?,
        format!("dual of {} (a={}, b={})", g.tag(), lat.a(), lat.b()),
    )
}
