//! Spreading-function representation `H = Σ_{b,ν} η_H(b,ν)·π(b,ν)`.
//!
//! `η(b,ν) = (1/N) Σ_t κ(t, t−b)·ω^{−νt}` and `‖H‖_HS = √N·‖η‖₂`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_len, Result};
use crate::linop::{LinOp, PhaseMap};
use crate::roots::Roots;
use crate::signal::Signal;
use crate::tfr::{stft, twisted_conv, Dft};

pub fn spreading_from_kernel(h: &LinOp) -> PhaseMap {
    let n = h.n();
    let k = h.kernel();
    let dft = Dft::new(n);
    let scale = 1.0 / n as f64;
    let mut eta = DMatrix::zeros(n, n);
    for b in 0..n {
        let mut diag: Vec<Complex64> = (0..n).map(|t| k[(t, (t + n - b) % n)]).collect();
        dft.forward(&mut diag);
        for (nu, v) in diag.into_iter().enumerate() {
            eta[(b, nu)] = v * scale;
        }
    }
    PhaseMap::from_matrix_unchecked(eta)
}

/// `κ(t,s) = Σ_ν η(t−s, ν)·ω^{νt}`; inverse of [`spreading_from_kernel`].
pub fn kernel_from_spreading(eta: &PhaseMap) -> LinOp {
    let n = eta.n();
    let dft = Dft::new(n);
    let mut k = DMatrix::zeros(n, n);
    for b in 0..n {
        let mut row: Vec<Complex64> = (0..n).map(|nu| eta.at(b, nu)).collect();
        dft.inverse(&mut row);
        for (t, v) in row.into_iter().enumerate() {
            k[(t, (t + n - b) % n)] = v;
        }
    }
    LinOp::from_matrix_unchecked(k)
}

/// Kernel of `Σ_{b,ν} η(b,ν)·π(b,ν)` accumulated shift by shift.
pub fn expand_tf_shifts(eta: &PhaseMap) -> LinOp {
    let n = eta.n();
    let roots = Roots::new(n);
    let mut k = DMatrix::zeros(n, n);
    for b in 0..n {
        for nu in 0..n {
            let c = eta.at(b, nu);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for t in 0..n {
                k[(t, (t + n - b) % n)] += c * roots.pow((nu * t) as i64);
            }
        }
    }
    LinOp::from_matrix_unchecked(k)
}

/// `η_H ♮ 𝒱_g f`, which equals `𝒱_g(Hf)`.
pub fn apply_tf_domain(eta: &PhaseMap, f: &Signal, g: &Signal) -> Result<PhaseMap> {
    check_len(eta.n(), f.len())?;
    twisted_conv(eta, &stft(f, g)?)
}

/// Spreading function of `K₂·K₁`.
pub fn compose_spreading(eta2: &PhaseMap, eta1: &PhaseMap) -> Result<PhaseMap> {
    twisted_conv(eta2, eta1)
}

/// Spreading function of `f ↦ ⟨f, g⟩h`, namely `𝒱_g h / N`.
pub fn rank_one_spreading(g: &Signal, h: &Signal) -> Result<PhaseMap> {
    let v = stft(h, g)?;
    Ok(v.scale(Complex64::new(1.0 / g.len() as f64, 0.0)))
}
