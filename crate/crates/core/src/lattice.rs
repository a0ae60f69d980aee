use serde::{Deserialize, Serialize};

use crate::error::{Result, TfError};

/// Separable time-frequency lattice `aℤ_N × bℤ_N`.
///
/// `a` is the time step in samples and `b` the frequency step in bins.
/// There are `M = N/a` time positions and `K = N/b` frequency positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TfLattice {
    n: usize,
    a: usize,
    b: usize,
}

impl TfLattice {
    pub fn new(n: usize, a: usize, b: usize) -> Result<Self> {
        if n == 0 {
            return Err(TfError::Lattice("signal length must be positive".into()));
        }
        if a == 0 || b == 0 {
            return Err(TfError::Lattice(format!("steps must be >= 1 (a={a}, b={b})")));
        }
        if !n.is_multiple_of(a) || !n.is_multiple_of(b) {
            return Err(TfError::Lattice(format!("steps must divide N={n} (a={a}, b={b})")));
        }
        Ok(TfLattice { n, a, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    /// Number of time positions `N/a`.
    pub fn m_count(&self) -> usize {
        self.n / self.a
    }

    /// Number of frequency positions `N/b`.
    pub fn k_count(&self) -> usize {
        self.n / self.b
    }

    /// Number of lattice points `MK`.
    pub fn size(&self) -> usize {
        self.m_count() * self.k_count()
    }

    pub fn redundancy(&self) -> f64 {
        self.n as f64 / (self.a * self.b) as f64
    }

    /// Steps of the adjoint lattice `(N/b, N/a)` in samples and bins.
    pub fn adjoint_steps(&self) -> (usize, usize) {
        (self.n / self.b, self.n / self.a)
    }

    /// Shape of the fundamental domain of the adjoint lattice, lag × Doppler.
    pub fn quotient_shape(&self) -> (usize, usize) {
        self.adjoint_steps()
    }

    /// Whether `(lag, doppler)` lies on the adjoint lattice.
    pub fn is_adjoint_point(&self, lag: i64, doppler: i64) -> bool {
        let (p, q) = self.adjoint_steps();
        lag.rem_euclid(p as i64) == 0 && doppler.rem_euclid(q as i64) == 0
    }

    pub(crate) fn check_n(&self, n: usize) -> Result<()> {
        crate::error::check_len(self.n, n)
    }
}
