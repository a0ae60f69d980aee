//! Twisted-spline-type spreading functions
//! `η = Σ_{k,ℓ} α_{kℓ}·δ_{(k·b₁, ℓ·ν₁)} ♮ φ` and their reduction to one or
//! several Gabor multipliers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_len, Result, TfError};
use crate::gm::{fit_gm, gm_spreading, Mask};
use crate::lattice::TfLattice;
use crate::linop::{LinOp, PhaseMap};
use crate::roots::Roots;
use crate::signal::{Signal, Window};
use crate::spread::kernel_from_spreading;
use crate::tfr::{tf_shift, tf_shift_matrix};

/// Multiplier-form residual accepted in strict mode.
pub const MULTIPLIER_FORM_TOLERANCE: f64 = 1e-8;

/// Coefficients `α_{kℓ}` at explicit integer offsets, a prototype `φ` and
/// the shift steps `b₁` (lag) and `ν₁` (Doppler).
#[derive(Debug, Clone, PartialEq)]
pub struct TstSpec {
    alpha: Vec<((i64, i64), Complex64)>,
    phi: PhaseMap,
    b1: usize,
    nu1: usize,
}

impl TstSpec {
    pub fn new(alpha: Vec<((i64, i64), Complex64)>, phi: PhaseMap, b1: usize, nu1: usize) -> Result<Self> {
        let n = phi.n();
        for (name, step) in [("b1", b1), ("nu1", nu1)] {
            if step == 0 || !n.is_multiple_of(step) {
                return Err(TfError::InvalidParameter(format!(
                    "{name} = {step} must be positive and divide N = {n}"
                )));
            }
        }
        if alpha.is_empty() {
            return Err(TfError::InvalidParameter("alpha must have at least one entry".into()));
        }
        if let Some(index) = alpha.iter().position(|(_, z)| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TfError::NonFinite { index });
        }
        Ok(TstSpec { alpha, phi, b1, nu1 })
    }

    pub fn alpha(&self) -> &[((i64, i64), Complex64)] {
        &self.alpha
    }

    pub fn phi(&self) -> &PhaseMap {
        &self.phi
    }

    pub fn b1(&self) -> usize {
        self.b1
    }

    pub fn nu1(&self) -> usize {
        self.nu1
    }

    pub fn n(&self) -> usize {
        self.phi.n()
    }

    /// Same spec with every coefficient multiplied by `c`.
    pub fn scale_alpha(&self, c: Complex64) -> TstSpec {
        TstSpec {
            alpha: self.alpha.iter().map(|&(k, z)| (k, z * c)).collect(),
            ..self.clone()
        }
    }

    fn shift(&self, k: i64, l: i64) -> (i64, i64) {
        (k * self.b1 as i64, l * self.nu1 as i64)
    }

    /// `Σ α_{kℓ}·δ_{(k·b₁, ℓ·ν₁)}`.
    pub fn comb(&self) -> PhaseMap {
        let mut c = PhaseMap::zeros(self.n());
        for &((k, l), z) in &self.alpha {
            let (b, nu) = self.shift(k, l);
            c.set(b, nu, c.get(b, nu) + z);
        }
        c
    }
}

/// `η(b,ν) = Σ α_{kℓ}·φ(b − k·b₁, ν − ℓ·ν₁)·ω^{−(ν − ℓ·ν₁)·k·b₁}`.
pub fn tst_spreading(spec: &TstSpec) -> PhaseMap {
    let n = spec.n();
    let roots = Roots::new(n);
    let mut eta = PhaseMap::zeros(n);
    for &((k, l), z) in &spec.alpha {
        let (sb, sn) = spec.shift(k, l);
        for b in 0..n as i64 {
            for nu in 0..n as i64 {
                let v = z * spec.phi.get(b - sb, nu - sn) * roots.pow(-(nu - sn) * sb);
                eta.set(b, nu, eta.get(b, nu) + v);
            }
        }
    }
    eta
}

/// `H = Σ α_{kℓ}·π(k·b₁, ℓ·ν₁)·H_φ`.
pub fn tst_operator(spec: &TstSpec) -> LinOp {
    let n = spec.n();
    let h_phi = kernel_from_spreading(&spec.phi);
    let mut acc = LinOp::zeros(n);
    for &((k, l), z) in &spec.alpha {
        let (b, nu) = spec.shift(k, l);
        let term = tf_shift_matrix(n, b, nu)
            .compose(&h_phi)
            .expect("matching sizes")
            .scale(z);
        acc = acc.add(&term).expect("matching sizes");
    }
    acc
}

/// How a prototype that is not exactly of multiplier form is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TstMode {
    /// Reject relative residuals above [`MULTIPLIER_FORM_TOLERANCE`].
    Strict,
    /// Proceed and report the residual.
    Lenient,
}

/// Reduction of a TST operator to a single Gabor multiplier.
#[derive(Debug, Clone)]
pub struct SingleGm {
    pub gamma: Window,
    pub mask: Mask,
    /// `‖φ − η_GM‖ / ‖φ‖` for the fitted prototype multiplier.
    pub residual: f64,
}

fn fit_prototype(spec: &TstSpec, g: &Signal, h: &Signal, lat: &TfLattice, mode: TstMode) -> Result<(Mask, f64)> {
    check_len(spec.n(), g.len())?;
    let fit = fit_gm(&spec.phi, g, h, lat, false)?;
    let approx = gm_spreading(&fit.mask, g, h)?;
    let norm = spec.phi.norm();
    let residual = if norm == 0.0 {
        0.0
    } else {
        spec.phi.sub(&approx)?.norm() / norm
    };
    if mode == TstMode::Strict && residual > MULTIPLIER_FORM_TOLERANCE {
        return Err(TfError::NotMultiplierForm { residual });
    }
    Ok((fit.mask, residual))
}

/// `γ = Σ α_{kℓ}·phase(k,ℓ)·π(k·b₁, ℓ·ν₁)h`.
fn synth_window(spec: &TstSpec, h: &Signal, phase: impl Fn(i64, i64) -> Complex64) -> Signal {
    let mut gamma = Signal::zeros(h.len());
    for &((k, l), z) in &spec.alpha {
        let (b, nu) = spec.shift(k, l);
        let term = tf_shift(b, nu, h).scale(z * phase(k, l));
        gamma = gamma.add(&term).expect("matching sizes");
    }
    gamma
}

/// Case `(b₁, ν₁) ∈ Λ°`: `H = 𝕄_{m; g, γ}` with `γ = Σ α_{kℓ}·π(k·b₁, ℓ·ν₁)h`
/// and `m` the multiplier mask of the prototype `φ`.
pub fn tst_to_single_gm(spec: &TstSpec, g: &Signal, h: &Signal, lat: &TfLattice, mode: TstMode) -> Result<SingleGm> {
    lat.check_n(spec.n())?;
    if !lat.is_adjoint_point(spec.b1 as i64, spec.nu1 as i64) {
        return Err(TfError::Lattice(format!(
            "steps (b1, nu1) = ({}, {}) are not on the adjoint lattice with steps {:?}",
            spec.b1,
            spec.nu1,
            lat.adjoint_steps()
        )));
    }
    let (mask, residual) = fit_prototype(spec, g, h, lat, mode)?;
    let gamma = synth_window(spec, h, |_, _| Complex64::new(1.0, 0.0));
    Ok(SingleGm {
        gamma: Window::new(gamma, "tst synthesis")?,
        mask,
        residual,
    })
}

/// One coset multiplier of a [`tst_to_gm_sum`] reduction.
#[derive(Debug, Clone)]
pub struct CosetMultiplier {
    /// Time-index residue `i = m mod q`.
    pub i: usize,
    /// Frequency-index residue `j = n mod p`.
    pub j: usize,
    /// Time positions `q·a·ℤ + i·a` and frequency positions `p·b·ℤ + j·b`.
    pub time_step: usize,
    pub time_offset: usize,
    pub freq_step: usize,
    pub freq_offset: usize,
    pub gamma: Window,
    /// Mask on the full lattice, zero off the coset.
    pub mask: Mask,
}

/// Reduction of a TST operator to a sum of coset multipliers.
#[derive(Debug, Clone)]
pub struct GmSum {
    pub terms: Vec<CosetMultiplier>,
    pub residual: f64,
}

impl GmSum {
    pub fn operator(&self, g: &Signal) -> Result<LinOp> {
        let n = g.len();
        let mut acc = LinOp::zeros(n);
        for t in &self.terms {
            acc = acc.add(&crate::gm::gm_matrix(&t.mask, g, t.gamma.signal())?)?;
        }
        Ok(acc)
    }
}

/// Case `b₁ = N/(p·b)`, `ν₁ = N/(q·a)`: `H` is a sum of `p·q` multipliers on
/// the cosets `(m mod q, n mod p)` with windows
/// `γ_{ij} = Σ α_{kℓ}·e^{2πi(ℓ·i/q − k·j/p)}·π(k·b₁, ℓ·ν₁)h`.
pub fn tst_to_gm_sum(
    spec: &TstSpec,
    g: &Signal,
    h: &Signal,
    lat: &TfLattice,
    p: usize,
    q: usize,
    mode: TstMode,
) -> Result<GmSum> {
    lat.check_n(spec.n())?;
    let n = lat.n();
    if p == 0 || q == 0 || !n.is_multiple_of(p * lat.b()) || !n.is_multiple_of(q * lat.a()) {
        return Err(TfError::InvalidParameter(format!(
            "p = {p}, q = {q} incompatible with lattice a = {}, b = {}",
            lat.a(),
            lat.b()
        )));
    }
    if spec.b1 != n / (p * lat.b()) || spec.nu1 != n / (q * lat.a()) {
        return Err(TfError::InvalidParameter(format!(
            "expected b1 = {}, nu1 = {} for p = {p}, q = {q}; got b1 = {}, nu1 = {}",
            n / (p * lat.b()),
            n / (q * lat.a()),
            spec.b1,
            spec.nu1
        )));
    }
    let (mask, residual) = fit_prototype(spec, g, h, lat, mode)?;
    let pq = (p * q) as i64;
    let roots = Roots::new(p * q);
    let mut terms = Vec::with_capacity(p * q);
    for i in 0..q {
        for j in 0..p {
            // e^{2πi(ℓi/q − kj/p)} = ω_{pq}^{ℓ·i·p − k·j·q}
            let phase = |k: i64, l: i64| roots.pow((l * i as i64 * p as i64 - k * j as i64 * q as i64).rem_euclid(pq));
            let gamma = synth_window(spec, h, phase);
            let data = DMatrix::from_fn(lat.m_count(), lat.k_count(), |m, k| {
                if m % q == i && k % p == j {
                    mask.get(m, k)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            terms.push(CosetMultiplier {
                i,
                j,
                time_step: q * lat.a(),
                time_offset: i * lat.a(),
                freq_step: p * lat.b(),
                freq_offset: j * lat.b(),
                gamma: Window::new(gamma, format!("tst synthesis ({i}, {j})"))?,
                mask: Mask::new(data, *lat)?,
            });
        }
    }
    Ok(GmSum { terms, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gm::gm_matrix;
    use crate::signal::gauss_window;
    use crate::spread::spreading_from_kernel;
    use crate::tfr::twisted_conv;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn rand_map(rng: &mut ChaCha8Rng, n: usize) -> PhaseMap {
        PhaseMap::from_fn(n, |_, _| rand_c(rng))
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn unit_alpha_gives_prototype() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let phi = rand_map(&mut rng, 8);
        let spec = TstSpec::new(vec![((0, 0), one())], phi.clone(), 2, 4).unwrap();
        assert!(tst_spreading(&spec).max_abs_diff(&phi) < 1e-15);
        assert!(tst_operator(&spec).max_abs_diff(&kernel_from_spreading(&phi)) < 1e-13);
    }

    #[test]
    fn spreading_is_twisted_convolution_with_comb() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let phi = rand_map(&mut rng, 8);
        let alpha = vec![
            ((0, 0), rand_c(&mut rng)),
            ((1, -1), rand_c(&mut rng)),
            ((-2, 3), rand_c(&mut rng)),
        ];
        let spec = TstSpec::new(alpha, phi.clone(), 2, 4).unwrap();
        let direct = tst_spreading(&spec);
        let conv = twisted_conv(&spec.comb(), &phi).unwrap();
        assert!(direct.max_abs_diff(&conv) < 1e-12);
        let op = tst_operator(&spec);
        assert!(spreading_from_kernel(&op).max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn shifted_identity() {
        let spec = TstSpec::new(vec![((1, 2), one())], PhaseMap::delta(8, 0, 0), 2, 1).unwrap();
        assert!(tst_operator(&spec).max_abs_diff(&tf_shift_matrix(8, 2, 2)) < 1e-14);
    }

    #[test]
    fn divisibility_is_checked() {
        assert!(TstSpec::new(vec![((0, 0), one())], PhaseMap::zeros(8), 3, 1).is_err());
        assert!(TstSpec::new(vec![((0, 0), one())], PhaseMap::zeros(8), 1, 0).is_err());
    }

    #[test]
    fn single_gm_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let n = 16;
        let lat = TfLattice::new(n, 2, 2).unwrap();
        let g = gauss_window(n, 1.0).unwrap();
        let h = gauss_window(n, 1.4).unwrap();
        let m0 = Mask::from_fn(lat, |_, _| rand_c(&mut rng));
        let phi = gm_spreading(&m0, g.signal(), h.signal()).unwrap();
        let unit = TstSpec::new(vec![((0, 0), one())], phi.clone(), 8, 8).unwrap();
        let red = tst_to_single_gm(&unit, g.signal(), h.signal(), &lat, TstMode::Strict).unwrap();
        assert!(red.mask.max_abs_diff(&m0) < 1e-10);
        assert!(red.gamma.signal().sub(h.signal()).unwrap().norm() < 1e-14);

        let alpha = vec![
            ((-1, 0), rand_c(&mut rng)),
            ((0, 0), rand_c(&mut rng)),
            ((1, 0), rand_c(&mut rng)),
        ];
        let spec = TstSpec::new(alpha, phi, 8, 8).unwrap();
        let red = tst_to_single_gm(&spec, g.signal(), h.signal(), &lat, TstMode::Strict).unwrap();
        let op = tst_operator(&spec);
        let rebuilt = gm_matrix(&red.mask, g.signal(), red.gamma.signal()).unwrap();
        assert!(op.sub(&rebuilt).unwrap().hs_norm() < 1e-10 * op.hs_norm());

        let theta = Complex64::from_polar(1.0, 0.7);
        let rot = tst_to_single_gm(&spec.scale_alpha(theta), g.signal(), h.signal(), &lat, TstMode::Strict).unwrap();
        assert!(rot.mask.max_abs_diff(&red.mask) < 1e-12);
        let scaled = red.gamma.signal().scale(theta);
        assert!(rot.gamma.signal().sub(&scaled).unwrap().norm() < 1e-12);
    }

    #[test]
    fn strict_mode_rejects_generic_prototype() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let n = 8;
        let lat = TfLattice::new(n, 2, 2).unwrap();
        let g = gauss_window(n, 1.0).unwrap();
        let spec = TstSpec::new(vec![((0, 0), one())], rand_map(&mut rng, n), 4, 4).unwrap();
        assert!(matches!(
            tst_to_single_gm(&spec, g.signal(), g.signal(), &lat, TstMode::Strict),
            Err(TfError::NotMultiplierForm { .. })
        ));
        let red = tst_to_single_gm(&spec, g.signal(), g.signal(), &lat, TstMode::Lenient).unwrap();
        assert!(red.residual > MULTIPLIER_FORM_TOLERANCE);
    }

    #[test]
    fn off_adjoint_steps_rejected() {
        let n = 8;
        let lat = TfLattice::new(n, 2, 2).unwrap();
        let g = gauss_window(n, 1.0).unwrap();
        let spec = TstSpec::new(vec![((0, 0), one())], PhaseMap::delta(n, 0, 0), 2, 4).unwrap();
        assert!(matches!(
            tst_to_single_gm(&spec, g.signal(), g.signal(), &lat, TstMode::Lenient),
            Err(TfError::Lattice(_))
        ));
    }

    #[test]
    fn trivial_split_matches_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let n = 16;
        let lat = TfLattice::new(n, 2, 4).unwrap();
        let g = gauss_window(n, 1.0).unwrap();
        let m0 = Mask::from_fn(lat, |_, _| rand_c(&mut rng));
        let phi = gm_spreading(&m0, g.signal(), g.signal()).unwrap();
        let spec = TstSpec::new(vec![((0, 0), rand_c(&mut rng)), ((1, 1), rand_c(&mut rng))], phi, 4, 8).unwrap();
        let single = tst_to_single_gm(&spec, g.signal(), g.signal(), &lat, TstMode::Strict).unwrap();
        let sum = tst_to_gm_sum(&spec, g.signal(), g.signal(), &lat, 1, 1, TstMode::Strict).unwrap();
        assert_eq!(sum.terms.len(), 1);
        assert!(sum.terms[0].mask.max_abs_diff(&single.mask) < 1e-15);
        assert!(sum.terms[0].gamma.signal().sub(single.gamma.signal()).unwrap().norm() < 1e-15);
    }
}
