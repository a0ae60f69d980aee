//! Discrete time-frequency transforms on `ℤ_N`.
//!
//! Conventions: `(π(b,ν)f)(t) = ω^{νt} f(t−b)`, `ω = e^{2πi/N}`, and the
//! STFT `𝒱_g f(b,ν) = ⟨f, π(b,ν)g⟩`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Result, TfError};
use crate::lattice::TfLattice;
use crate::linop::{LinOp, PhaseMap};
use crate::roots::{wrap, Roots};
use crate::signal::Signal;

/// Largest size evaluated by the direct quadruple sum in [`twisted_conv`].
pub const TWISTED_NAIVE_MAX: usize = 64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub(crate) struct Dft {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Dft {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Dft {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    /// In place `X(k) = Σ x(t) ω^{−kt}`.
    pub(crate) fn forward(&self, x: &mut [Complex64]) {
        self.fwd.process(x);
    }

    /// In place `x(t) = Σ X(k) ω^{kt}` (unnormalized).
    pub(crate) fn inverse(&self, x: &mut [Complex64]) {
        self.inv.process(x);
    }
}

/// `π(b,ν)f`.
pub fn tf_shift(b: i64, nu: i64, f: &Signal) -> Signal {
    let n = f.len();
    let roots = Roots::new(n);
    let data = (0..n)
        .map(|t| roots.pow(nu * t as i64) * f[wrap(t as i64 - b, n)])
        .collect();
    Signal::from_vec_unchecked(data)
}

/// Kernel of `π(b,ν)` on `C^N`.
pub fn tf_shift_matrix(n: usize, b: i64, nu: i64) -> LinOp {
    let roots = Roots::new(n);
    let mut k = DMatrix::zeros(n, n);
    for t in 0..n {
        k[(t, wrap(t as i64 - b, n))] = roots.pow(nu * t as i64);
    }
    LinOp::from_matrix_unchecked(k)
}

/// Full STFT `F(b,ν) = Σ_t f(t)·conj(g(t−b))·ω^{−νt}`, one FFT per lag.
pub fn stft(f: &Signal, g: &Signal) -> Result<PhaseMap> {
    check_len(f.len(), g.len())?;
    let n = f.len();
    let dft = Dft::new(n);
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|b| {
            let mut x: Vec<Complex64> = (0..n).map(|t| f[t] * g[(t + n - b) % n].conj()).collect();
            dft.forward(&mut x);
            x
        })
        .collect();
    Ok(PhaseMap::from_matrix_unchecked(DMatrix::from_fn(n, n, |b, nu| {
        rows[b][nu]
    })))
}

/// Gabor coefficients `c(m,n) = 𝒱_g f(m·a, n·b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborCoeffs {
    data: DMatrix<Complex64>,
    lat: TfLattice,
}

impl GaborCoeffs {
    pub fn new(data: DMatrix<Complex64>, lat: TfLattice) -> Result<Self> {
        if data.nrows() != lat.m_count() || data.ncols() != lat.k_count() {
            return Err(TfError::DimensionMismatch {
                expected: lat.size(),
                found: data.len(),
            });
        }
        Ok(GaborCoeffs { data, lat })
    }

    pub fn zeros(lat: TfLattice) -> Self {
        GaborCoeffs {
            data: DMatrix::zeros(lat.m_count(), lat.k_count()),
            lat,
        }
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn lattice(&self) -> &TfLattice {
        &self.lat
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.data[(m, n)]
    }

    pub fn set(&mut self, m: usize, n: usize, value: Complex64) {
        self.data[(m, n)] = value;
    }

    /// Pointwise product with a coefficient array of the same shape.
    pub fn mul_elementwise(&self, other: &DMatrix<Complex64>) -> Result<GaborCoeffs> {
        check_len(self.data.len(), other.len())?;
        GaborCoeffs::new(self.data.component_mul(other), self.lat)
    }
}

pub fn gabor_analysis(f: &Signal, g: &Signal, lat: &TfLattice) -> Result<GaborCoeffs> {
    check_len(f.len(), g.len())?;
    lat.check_n(f.len())?;
    let n = f.len();
    let dft = Dft::new(n);
    let mut data = DMatrix::zeros(lat.m_count(), lat.k_count());
    for m in 0..lat.m_count() {
        let shift = m * lat.a();
        let mut x: Vec<Complex64> = (0..n).map(|t| f[t] * g[(t + n - shift) % n].conj()).collect();
        dft.forward(&mut x);
        for k in 0..lat.k_count() {
            data[(m, k)] = x[k * lat.b()];
        }
    }
    Ok(GaborCoeffs { data, lat: *lat })
}

/// `Σ_{m,n} c(m,n)·π(m·a, n·b)h`.
pub fn gabor_synthesis(c: &GaborCoeffs, h: &Signal) -> Result<Signal> {
    let lat = c.lattice();
    lat.check_n(h.len())?;
    let n = h.len();
    let kc = lat.k_count();
    let dft = Dft::new(kc);
    let mut out = vec![ZERO; n];
    for m in 0..lat.m_count() {
        // Σ_n c(m,n) ω^{n b t} is a length-K inverse DFT evaluated at t mod K
        let mut row: Vec<Complex64> = (0..kc).map(|k| c.data[(m, k)]).collect();
        dft.inverse(&mut row);
        let shift = m * lat.a();
        for (t, o) in out.iter_mut().enumerate() {
            *o += row[t % kc] * h[(t + n - shift) % n];
        }
    }
    Ok(Signal::from_vec_unchecked(out))
}

/// Symplectic DFT `G(t,ξ) = (1/N) Σ_{b,ν} F(b,ν)·ω^{−(bξ − tν)}`; an involution.
pub fn symplectic_dft(f: &PhaseMap) -> PhaseMap {
    let n = f.n();
    let dft = Dft::new(n);
    // A(b,t) = Σ_ν F(b,ν) ω^{tν}
    let mut a = f.data().clone();
    for b in 0..n {
        let mut row: Vec<Complex64> = (0..n).map(|nu| a[(b, nu)]).collect();
        dft.inverse(&mut row);
        for (t, v) in row.into_iter().enumerate() {
            a[(b, t)] = v;
        }
    }
    // G(t,ξ) = (1/N) Σ_b A(b,t) ω^{−bξ}
    let scale = 1.0 / n as f64;
    let mut g = DMatrix::zeros(n, n);
    for t in 0..n {
        let mut col: Vec<Complex64> = (0..n).map(|b| a[(b, t)]).collect();
        dft.forward(&mut col);
        for (xi, v) in col.into_iter().enumerate() {
            g[(t, xi)] = v * scale;
        }
    }
    PhaseMap::from_matrix_unchecked(g)
}

/// Twisted convolution
/// `(F♮G)(b,ν) = Σ_{b′,ν′} F(b′,ν′)·G(b−b′, ν−ν′)·ω^{−b′(ν−ν′)}`.
pub fn twisted_conv(f: &PhaseMap, g: &PhaseMap) -> Result<PhaseMap> {
    check_len(f.n(), g.n())?;
    if f.n() <= TWISTED_NAIVE_MAX {
        Ok(twisted_conv_naive(f, g))
    } else {
        Ok(twisted_conv_fast(f, g))
    }
}

/// Direct `O(N⁴)` evaluation.
pub fn twisted_conv_naive(f: &PhaseMap, g: &PhaseMap) -> PhaseMap {
    let n = f.n();
    let roots = Roots::new(n);
    let fd = f.data();
    let gd = g.data();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|b| {
            (0..n)
                .map(|nu| {
                    let mut acc = ZERO;
                    for bp in 0..n {
                        let bd = (b + n - bp) % n;
                        for np in 0..n {
                            let x = fd[(bp, np)];
                            if x == ZERO {
                                continue;
                            }
                            let nd = (nu + n - np) % n;
                            acc += x * gd[(bd, nd)] * roots.pow(-((bp * nd) as i64));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    PhaseMap::from_matrix_unchecked(DMatrix::from_fn(n, n, |b, nu| rows[b][nu]))
}

/// `O(N³)` evaluation through per-lag DFTs along the Doppler axis.
///
/// With `A_{b′} = DFT[F(b′,·)ω^{b′·}]` and `B_{b″} = DFT[G(b″,·)]`, row `b`
/// of the result is `IDFT_k[Σ_{b′} A_{b′}(k+b′)·B_{b−b′}(k+b′)] / N`.
pub fn twisted_conv_fast(f: &PhaseMap, g: &PhaseMap) -> PhaseMap {
    let n = f.n();
    let roots = Roots::new(n);
    let dft = Dft::new(n);
    let spectra = |src: &PhaseMap, twist: bool| -> Vec<Vec<Complex64>> {
        (0..n)
            .into_par_iter()
            .map(|b| {
                let mut row: Vec<Complex64> = (0..n)
                    .map(|nu| {
                        let v = src.at(b, nu);
                        if twist {
                            v * roots.pow((b * nu) as i64)
                        } else {
                            v
                        }
                    })
                    .collect();
                dft.forward(&mut row);
                row
            })
            .collect()
    };
    let a = spectra(f, true);
    let bspec = spectra(g, false);
    let scale = 1.0 / n as f64;
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![ZERO; n];
            for (bp, ab) in a.iter().enumerate() {
                let bb = &bspec[(b + n - bp) % n];
                for (k, slot) in acc.iter_mut().enumerate() {
                    let idx = (k + bp) % n;
                    *slot += ab[idx] * bb[idx];
                }
            }
            dft.inverse(&mut acc);
            acc.iter().map(|z| z * scale).collect()
        })
        .collect();
    PhaseMap::from_matrix_unchecked(DMatrix::from_fn(n, n, |b, nu| rows[b][nu]))
}
