//! Seeded random operators for experiments.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use tfop::gm::{gm_spreading, Mask};
use tfop::io::{parse_json, ComplexArray};
use tfop::spread::kernel_from_spreading;
use tfop::tst::TstSpec;
use tfop::{gauss_window, LinOp, PhaseMap, Result, TfError, TfLattice};

/// Name of the generator recorded in output metadata.
pub const RNG_NAME: &str = "ChaCha8Rng";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorSource {
    /// i.i.d. uniform[−0.5, 0.5] spreading on a `lag × doppler` box around 0.
    Rect { lag: usize, doppler: usize },
    /// Random convolution (spreading on ν = 0, lags `−L..=L`) plus
    /// `noise`-scaled uniform spreading on the box `[−B, B]²`.
    PerturbedLti {
        lag_half_width: usize,
        noise: f64,
        box_half_width: usize,
    },
    /// Kernel JSON file.
    File { path: String },
}

/// Spreading function uniform on lags `−⌊L/2⌋..L−⌊L/2⌋` and Dopplers likewise.
pub fn rect_spreading(n: usize, lag: usize, doppler: usize, rng: &mut ChaCha8Rng) -> Result<PhaseMap> {
    if lag == 0 || doppler == 0 || lag > n || doppler > n {
        return Err(TfError::InvalidParameter(format!(
            "support box {lag} x {doppler} must be nonempty and fit N = {n}"
        )));
    }
    let mut eta = PhaseMap::zeros(n);
    for i in 0..lag as i64 {
        for j in 0..doppler as i64 {
            let v = rng.gen_range(-0.5..0.5);
            eta.set(i - lag as i64 / 2, j - doppler as i64 / 2, Complex64::new(v, 0.0));
        }
    }
    Ok(eta)
}

pub fn perturbed_lti_spreading(
    n: usize,
    lag_half_width: usize,
    noise: f64,
    box_half_width: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PhaseMap> {
    if 2 * lag_half_width + 1 > n || 2 * box_half_width + 1 > n {
        return Err(TfError::InvalidParameter(format!(
            "lag half-width {lag_half_width} and box half-width {box_half_width} must fit N = {n}"
        )));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(TfError::InvalidParameter(format!(
            "noise scale must be nonnegative, got {noise}"
        )));
    }
    let mut eta = PhaseMap::zeros(n);
    let l = lag_half_width as i64;
    for i in -l..=l {
        eta.set(i, 0, Complex64::new(rng.gen_range(-0.5..0.5), 0.0));
    }
    let b = box_half_width as i64;
    for i in -b..=b {
        for j in -b..=b {
            let v = noise * rng.gen_range(-0.5..0.5);
            eta.set(i, j, eta.get(i, j) + v);
        }
    }
    Ok(eta)
}

/// Kernel of a generated operator; `File` sources are rejected here.
pub fn generate(source: &OperatorSource, n: usize, rng: &mut ChaCha8Rng) -> Result<LinOp> {
    let eta = match *source {
        OperatorSource::Rect { lag, doppler } => rect_spreading(n, lag, doppler, rng)?,
        OperatorSource::PerturbedLti {
            lag_half_width,
            noise,
            box_half_width,
        } => perturbed_lti_spreading(n, lag_half_width, noise, box_half_width, rng)?,
        OperatorSource::File { .. } => {
            return Err(TfError::InvalidParameter(
                "file operators are loaded, not generated".into(),
            ))
        }
    };
    Ok(kernel_from_spreading(&eta))
}

/// Load a kernel JSON file.
pub fn load_kernel(path: &Path) -> Result<LinOp> {
    let text =
        std::fs::read_to_string(path).map_err(|e| TfError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_json::<ComplexArray>(&text)
        .map_err(|e| TfError::Parse(format!("{}: {e}", path.display())))?
        .to_linop()
}

/// Generate or load the operator described by `source`.
pub fn resolve(source: &OperatorSource, n: usize, rng: &mut ChaCha8Rng, base: Option<&Path>) -> Result<LinOp> {
    match source {
        OperatorSource::File { path } => {
            let p = match base {
                Some(dir) if Path::new(path).is_relative() => dir.join(path),
                _ => Path::new(path).to_path_buf(),
            };
            let op = load_kernel(&p)?;
            if op.n() != n {
                return Err(TfError::DimensionMismatch {
                    expected: n,
                    found: op.n(),
                });
            }
            Ok(op)
        }
        _ => generate(source, n, rng),
    }
}

/// Built-in TST example: nine atoms `α_{kℓ}`, `k, ℓ ∈ {−1, 0, 1}`, with
/// `b₁ = ν₁ = 4` at `N = 16`, and a prototype that is a Gabor multiplier on
/// the `2 × 2` lattice with Gaussian windows of width 1.
pub fn tst_example(rng: &mut ChaCha8Rng) -> Result<TstSpec> {
    let n = 16;
    let lat = TfLattice::new(n, 2, 2)?;
    let g = gauss_window(n, 1.0)?;
    let mut draw = || Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    let mut alpha = Vec::with_capacity(9);
    for k in -1..=1 {
        for l in -1..=1 {
            alpha.push(((k, l), draw()));
        }
    }
    let mask = Mask::from_fn(lat, |_, _| draw());
    let phi = gm_spreading(&mask, g.signal(), g.signal())?;
    TstSpec::new(alpha, phi, 4, 4)
}
