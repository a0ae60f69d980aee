//! Gabor multipliers `𝕄_{m;g,h} f = Σ_λ m(λ)·⟨f, π(λ)g⟩·π(λ)h` and their
//! best Hilbert-Schmidt approximation of arbitrary operators.
//!
//! Quotient quantities live on `□ = [0, N/b) × [0, N/a)` (lag × Doppler);
//! the point `p = (β, ν)` stands for the coset `p + Λ°`.

use nalgebra::{DMatrix, Scalar};
use num_complex::Complex64;

use crate::error::{check_len, Result, TfError};
use crate::lattice::TfLattice;
use crate::linop::{LinOp, PhaseMap};
use crate::roots::Roots;
use crate::signal::Signal;
use crate::spread::spreading_from_kernel;
use crate::sum::{CompensatedSum, ComplexSum};
use crate::tfr::{gabor_analysis, gabor_synthesis, stft, GaborCoeffs};

/// Relative level below which `𝒰` counts as vanishing.
pub const RIESZ_TOLERANCE: f64 = 1e-10;

/// Relative level below which spreading entries count as zero.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

/// Multiplier coefficients `m(m, n)` on the lattice, `M × K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    data: DMatrix<Complex64>,
    lat: TfLattice,
}

impl Mask {
    pub fn new(data: DMatrix<Complex64>, lat: TfLattice) -> Result<Self> {
        if data.nrows() != lat.m_count() || data.ncols() != lat.k_count() {
            return Err(TfError::DimensionMismatch {
                expected: lat.size(),
                found: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TfError::NonFinite { index });
        }
        Ok(Mask { data, lat })
    }

    pub fn constant(lat: TfLattice, c: Complex64) -> Self {
        Mask {
            data: DMatrix::from_element(lat.m_count(), lat.k_count(), c),
            lat,
        }
    }

    pub fn from_fn(lat: TfLattice, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Mask {
            data: DMatrix::from_fn(lat.m_count(), lat.k_count(), f),
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

    pub fn scale(&self, c: Complex64) -> Mask {
        Mask {
            data: &self.data * c,
            lat: self.lat,
        }
    }

    pub fn max_abs_diff(&self, other: &Mask) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

/// Values on the fundamental domain `□`, shape `(N/b) × (N/a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedQuotient<T: Scalar> {
    data: DMatrix<T>,
    lat: TfLattice,
}

impl<T: Scalar> FoldedQuotient<T> {
    pub fn from_fn(lat: TfLattice, f: impl FnMut(usize, usize) -> T) -> Self {
        let (r, c) = lat.quotient_shape();
        FoldedQuotient {
            data: DMatrix::from_fn(r, c, f),
            lat,
        }
    }

    pub fn data(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn lattice(&self) -> &TfLattice {
        &self.lat
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    pub fn get(&self, lag: usize, doppler: usize) -> T {
        self.data[(lag, doppler)].clone()
    }

    /// Value at an arbitrary phase-space point, by periodicity.
    pub fn periodic(&self, lag: usize, doppler: usize) -> T {
        let (r, c) = self.shape();
        self.data[(lag % r, doppler % c)].clone()
    }
}

impl FoldedQuotient<f64> {
    pub fn min(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First point (row-major) attaining the minimum.
    pub fn argmin(&self) -> (usize, usize) {
        let (r, c) = self.shape();
        let mut best = (0, 0);
        for i in 0..r {
            for j in 0..c {
                if self.data[(i, j)] < self.data[best] {
                    best = (i, j);
                }
            }
        }
        best
    }
}

/// Coset members `(β + k·N/b, ν + ℓ·N/a)`, coset-major (`k` outer, `ℓ` inner).
pub fn coset(lat: &TfLattice, lag: usize, doppler: usize) -> impl Iterator<Item = (usize, usize)> {
    let (sl, sd) = lat.adjoint_steps();
    let (a, b) = (lat.a(), lat.b());
    (0..b).flat_map(move |k| (0..a).map(move |l| (lag + k * sl, doppler + l * sd)))
}

fn fold_real(lat: &TfLattice, f: impl Fn(usize, usize) -> f64) -> FoldedQuotient<f64> {
    FoldedQuotient::from_fn(*lat, |p, q| {
        let mut s = CompensatedSum::default();
        for (x, y) in coset(lat, p, q) {
            s.add(f(x, y));
        }
        s.value()
    })
}

fn fold_complex(lat: &TfLattice, f: impl Fn(usize, usize) -> Complex64) -> FoldedQuotient<Complex64> {
    FoldedQuotient::from_fn(*lat, |p, q| {
        let mut s = ComplexSum::default();
        for (x, y) in coset(lat, p, q) {
            s.add(f(x, y));
        }
        s.value()
    })
}

fn check_windows(g: &Signal, h: &Signal, lat: &TfLattice) -> Result<()> {
    check_len(g.len(), h.len())?;
    lat.check_n(g.len())
}

pub fn gm_apply(mask: &Mask, g: &Signal, h: &Signal, f: &Signal) -> Result<Signal> {
    check_windows(g, h, mask.lattice())?;
    let c = gabor_analysis(f, g, mask.lattice())?;
    let c = GaborCoeffs::new(c.data().component_mul(mask.data()), *mask.lattice())?;
    gabor_synthesis(&c, h)
}

/// Kernel of the multiplier, column by column.
pub fn gm_matrix(mask: &Mask, g: &Signal, h: &Signal) -> Result<LinOp> {
    check_windows(g, h, mask.lattice())?;
    let n = g.len();
    let mut k = DMatrix::zeros(n, n);
    for s in 0..n {
        let col = gm_apply(mask, g, h, &Signal::delta(n, s))?;
        for t in 0..n {
            k[(t, s)] = col[t];
        }
    }
    Ok(LinOp::from_matrix_unchecked(k))
}

/// `ℳ^{(d)}(β,ν) = Σ_{m,n} m(m,n)·ω^{n·b·β − m·a·ν}` on `□`.
pub fn transfer_function(mask: &Mask) -> FoldedQuotient<Complex64> {
    let lat = *mask.lattice();
    let roots = Roots::new(lat.n());
    let (a, b) = (lat.a() as i64, lat.b() as i64);
    FoldedQuotient::from_fn(lat, |beta, nu| {
        let mut s = ComplexSum::default();
        for m in 0..lat.m_count() {
            for n in 0..lat.k_count() {
                let e = n as i64 * b * beta as i64 - m as i64 * a * nu as i64;
                s.add(mask.get(m, n) * roots.pow(e));
            }
        }
        s.value()
    })
}

/// Inverse of [`transfer_function`]:
/// `m(m,n) = (1/(MK)) Σ_{□} ℳ(β,ν)·ω^{−(n·b·β − m·a·ν)}`.
pub fn mask_from_transfer(t: &FoldedQuotient<Complex64>) -> Mask {
    let lat = *t.lattice();
    let roots = Roots::new(lat.n());
    let (a, b) = (lat.a() as i64, lat.b() as i64);
    let (r, c) = t.shape();
    let scale = 1.0 / lat.size() as f64;
    Mask::from_fn(lat, |m, n| {
        let mut s = ComplexSum::default();
        for beta in 0..r {
            for nu in 0..c {
                let e = n as i64 * b * beta as i64 - m as i64 * a * nu as i64;
                s.add(t.get(beta, nu) * roots.pow(-e));
            }
        }
        s.value() * scale
    })
}

/// `η = (1/N)·ℳ^{(d)}·𝒱_g h`.
pub fn gm_spreading(mask: &Mask, g: &Signal, h: &Signal) -> Result<PhaseMap> {
    check_windows(g, h, mask.lattice())?;
    let n = g.len();
    let t = transfer_function(mask);
    let v = stft(h, g)?;
    let scale = 1.0 / n as f64;
    Ok(PhaseMap::from_fn(n, |b, nu| t.periodic(b, nu) * v.at(b, nu) * scale))
}

/// `𝒰(p) = Σ_{z ∈ p+Λ°} |𝒱_g h(z)|²`.
pub fn u_function(g: &Signal, h: &Signal, lat: &TfLattice) -> Result<FoldedQuotient<f64>> {
    check_windows(g, h, lat)?;
    let v = stft(h, g)?;
    Ok(fold_real(lat, |x, y| v.at(x, y).norm_sqr()))
}

/// Outcome of fitting a multiplier to a spreading function.
#[derive(Debug, Clone)]
pub struct GmFit {
    pub mask: Mask,
    pub transfer: FoldedQuotient<Complex64>,
    pub u: FoldedQuotient<f64>,
    /// Quotient points skipped because `𝒰` vanished (pseudo-inverse mode only).
    pub zero_filled: Vec<(usize, usize)>,
}

/// Best transfer function `ℳ = N·Σ conj(𝒱_g h)·η / 𝒰` and its mask.
pub fn fit_gm(eta: &PhaseMap, g: &Signal, h: &Signal, lat: &TfLattice, pinv: bool) -> Result<GmFit> {
    check_windows(g, h, lat)?;
    check_len(g.len(), eta.n())?;
    let n = g.len();
    let v = stft(h, g)?;
    let u = fold_real(lat, |x, y| v.at(x, y).norm_sqr());
    let cross = fold_complex(lat, |x, y| v.at(x, y).conj() * eta.at(x, y));
    let cutoff = RIESZ_TOLERANCE * u.max();
    let mut zero_filled = Vec::new();
    let (r, c) = u.shape();
    for p in 0..r {
        for q in 0..c {
            if !(u.get(p, q) > cutoff) {
                if !pinv {
                    return Err(TfError::RieszFailure {
                        point: (p, q),
                        value: u.get(p, q),
                    });
                }
                zero_filled.push((p, q));
            }
        }
    }
    let transfer = FoldedQuotient::from_fn(*lat, |p, q| {
        if zero_filled.contains(&(p, q)) {
            Complex64::new(0.0, 0.0)
        } else {
            cross.get(p, q) * (n as f64 / u.get(p, q))
        }
    });
    let mask = mask_from_transfer(&transfer);
    Ok(GmFit {
        mask,
        transfer,
        u,
        zero_filled,
    })
}

/// Mask of the best Hilbert-Schmidt approximation of `op` by a Gabor
/// multiplier with windows `g`, `h`.
pub fn best_gm_mask(op: &LinOp, g: &Signal, h: &Signal, lat: &TfLattice) -> Result<Mask> {
    Ok(fit_gm(&spreading_from_kernel(op), g, h, lat, false)?.mask)
}

/// Approximation quality of the best Gabor multiplier.
#[derive(Debug, Clone)]
pub struct GmReport {
    pub mask: Mask,
    pub approx: LinOp,
    /// `‖H − 𝕄‖²_HS`, from the kernels.
    pub err_hs2: f64,
    /// `‖H − 𝕄‖_HS / ‖H + 𝕄‖_HS`.
    pub err_rel: f64,
    /// `‖H‖²_HS · max_□ (1 − ℰ)`.
    pub bound: f64,
    /// `N · Σ_□ Γ_H·(1 − ℰ)`.
    pub fold_err: f64,
    pub e: FoldedQuotient<f64>,
    pub gamma_h: FoldedQuotient<f64>,
    pub zero_filled: Vec<(usize, usize)>,
}

/// `‖H − K‖ / ‖H + K‖` in the Hilbert-Schmidt norm (0 when both vanish).
pub fn relative_error(op: &LinOp, approx: &LinOp) -> Result<f64> {
    let num = op.sub(approx)?.hs_norm();
    let den = op.add(approx)?.hs_norm();
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

pub fn gm_error_and_bound(op: &LinOp, g: &Signal, h: &Signal, lat: &TfLattice, pinv: bool) -> Result<GmReport> {
    let eta = spreading_from_kernel(op);
    let fit = fit_gm(&eta, g, h, lat, pinv)?;
    let n = g.len() as f64;
    let v = stft(h, g)?;
    let gamma_h = fold_real(lat, |x, y| eta.at(x, y).norm_sqr());
    let cross = fold_complex(lat, |x, y| eta.at(x, y) * v.at(x, y).conj());
    let e = FoldedQuotient::from_fn(*lat, |p, q| {
        let den = gamma_h.get(p, q) * fit.u.get(p, q);
        if gamma_h.get(p, q) == 0.0 || den == 0.0 {
            if gamma_h.get(p, q) == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            (cross.get(p, q).norm_sqr() / den).clamp(0.0, 1.0)
        }
    });
    let mut fold = CompensatedSum::default();
    let (r, c) = e.shape();
    let mut worst: f64 = 0.0;
    for p in 0..r {
        for q in 0..c {
            let gap = if fit.zero_filled.contains(&(p, q)) {
                1.0
            } else {
                1.0 - e.get(p, q)
            };
            fold.add(gamma_h.get(p, q) * gap);
            worst = worst.max(gap);
        }
    }
    let approx = gm_matrix(&fit.mask, g, h)?;
    let err_hs2 = op.sub(&approx)?.hs_norm_sqr();
    let err_rel = relative_error(op, &approx)?;
    Ok(GmReport {
        bound: op.hs_norm_sqr() * worst,
        fold_err: n * fold.value(),
        err_hs2,
        err_rel,
        e,
        gamma_h,
        mask: fit.mask,
        approx,
        zero_filled: fit.zero_filled,
    })
}

/// True iff the spreading support fits `[−t₀,t₀] × [−ξ₀,ξ₀]` with `4·t₀·ξ₀ < N`.
///
/// Entries above `SUPPORT_TOLERANCE · max|η|` outside the box are reported.
pub fn underspread_check(eta: &PhaseMap, t0: usize, xi0: usize) -> Result<bool> {
    let n = eta.n();
    let peak = eta.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let centred = |i: usize| if i <= n / 2 { i } else { n - i };
    let mut indices = Vec::new();
    for b in 0..n {
        for nu in 0..n {
            let inside = centred(b) <= t0 && centred(nu) <= xi0;
            if !inside && eta.at(b, nu).norm() > SUPPORT_TOLERANCE * peak {
                indices.push((b, nu));
            }
        }
    }
    if !indices.is_empty() {
        return Err(TfError::SupportViolation { indices });
    }
    Ok(4 * t0 * xi0 < n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::dual_window;
    use crate::signal::gauss_window;
    use crate::tfr::{tf_shift, tf_shift_matrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn rand_signal(rng: &mut ChaCha8Rng, n: usize) -> Signal {
        Signal::new((0..n).map(|_| rand_c(rng)).collect()).unwrap()
    }

    fn rand_mask(rng: &mut ChaCha8Rng, lat: TfLattice) -> Mask {
        Mask::from_fn(lat, |_, _| rand_c(rng))
    }

    fn rand_op(rng: &mut ChaCha8Rng, n: usize) -> LinOp {
        LinOp::new(DMatrix::from_fn(n, n, |_, _| rand_c(rng))).unwrap()
    }

    #[test]
    fn constant_mask_with_dual_is_identity() {
        let g = gauss_window(16, 1.0).unwrap();
        let lat = TfLattice::new(16, 2, 4).unwrap();
        let h = dual_window(&g, &lat).unwrap();
        let id = gm_matrix(&Mask::constant(lat, c(1.0, 0.0)), g.signal(), h.signal()).unwrap();
        assert!(id.max_abs_diff(&LinOp::identity(16)) < 1e-10);
        let zero = gm_matrix(&Mask::constant(lat, c(0.0, 0.0)), g.signal(), h.signal()).unwrap();
        assert_eq!(zero.hs_norm(), 0.0);
    }

    #[test]
    fn single_coefficient_is_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let lat = TfLattice::new(8, 2, 4).unwrap();
        let g = rand_signal(&mut rng, 8);
        let h = rand_signal(&mut rng, 8);
        let mask = Mask::from_fn(lat, |m, n| if (m, n) == (3, 1) { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let got = gm_matrix(&mask, &g, &h).unwrap();
        let want = LinOp::rank_one(&tf_shift(6, 4, &g), &tf_shift(6, 4, &h)).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn matrix_agrees_with_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let lat = TfLattice::new(8, 2, 2).unwrap();
        let g = rand_signal(&mut rng, 8);
        let h = rand_signal(&mut rng, 8);
        let mask = rand_mask(&mut rng, lat);
        let k = gm_matrix(&mask, &g, &h).unwrap();
        let f1 = rand_signal(&mut rng, 8);
        let f2 = rand_signal(&mut rng, 8);
        let z = c(0.3, -0.7);
        let f = f1.add(&f2.scale(z)).unwrap();
        for x in [&Signal::delta(8, 0), &f1, &f] {
            let lhs = k.apply(x).unwrap();
            let rhs = gm_apply(&mask, &g, &h, x).unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn spreading_matches_kernel_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let lat = TfLattice::new(8, 2, 2).unwrap();
        let g = rand_signal(&mut rng, 8);
        let h = rand_signal(&mut rng, 8);
        let mask = rand_mask(&mut rng, lat);
        let a = gm_spreading(&mask, &g, &h).unwrap();
        let b = spreading_from_kernel(&gm_matrix(&mask, &g, &h).unwrap());
        assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn constant_mask_transfer_is_comb() {
        let lat = TfLattice::new(12, 3, 2).unwrap();
        let t = transfer_function(&Mask::constant(lat, c(1.0, 0.0)));
        let (r, cc) = t.shape();
        for p in 0..r {
            for q in 0..cc {
                let want = if (p, q) == (0, 0) { lat.size() as f64 } else { 0.0 };
                assert!((t.get(p, q) - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn transfer_round_trip_and_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let lat = TfLattice::new(12, 4, 3).unwrap();
        let mask = rand_mask(&mut rng, lat);
        assert!(mask_from_transfer(&transfer_function(&mask)).max_abs_diff(&mask) < 1e-12);
        // direct evaluation of ℳ^{(d)} off the fundamental domain
        let roots = Roots::new(12);
        let eval = |beta: i64, nu: i64| {
            let mut s = c(0.0, 0.0);
            for m in 0..3i64 {
                for n in 0..4i64 {
                    s += mask.get(m as usize, n as usize) * roots.pow(n * 3 * beta - m * 4 * nu);
                }
            }
            s
        };
        for beta in 0..12 {
            for nu in 0..12 {
                assert_eq!(eval(beta + 4, nu), eval(beta, nu));
                assert!((eval(beta, nu + 3) - eval(beta, nu)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn u_function_full_fold_and_scaling() {
        let g = gauss_window(8, 1.0).unwrap();
        let lat = TfLattice::new(8, 8, 8).unwrap();
        let u = u_function(g.signal(), g.signal(), &lat).unwrap();
        assert_eq!(u.shape(), (1, 1));
        assert!((u.get(0, 0) - 8.0).abs() < 1e-12);
        let lat = TfLattice::new(8, 2, 4).unwrap();
        let h2 = g.signal().scale(c(2.0, 0.0));
        let u1 = u_function(g.signal(), g.signal(), &lat).unwrap();
        let u4 = u_function(g.signal(), &h2, &lat).unwrap();
        for p in 0..u1.shape().0 {
            for q in 0..u1.shape().1 {
                assert!((u4.get(p, q) - 4.0 * u1.get(p, q)).abs() < 1e-12 * u4.get(p, q));
            }
        }
    }

    #[test]
    fn recovers_multiplier_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let lat = TfLattice::new(16, 4, 4).unwrap();
        let g = gauss_window(16, 1.0).unwrap();
        let h = rand_signal(&mut rng, 16);
        let m0 = rand_mask(&mut rng, lat);
        let op = gm_matrix(&m0, g.signal(), &h).unwrap();
        let m = best_gm_mask(&op, g.signal(), &h, &lat).unwrap();
        assert!(m.max_abs_diff(&m0) < 1e-10);
        let rep = gm_error_and_bound(&op, g.signal(), &h, &lat, false).unwrap();
        assert!(rep.err_hs2 < 1e-20 * op.hs_norm_sqr().max(1.0));
        assert!(rep.bound < 1e-9 * op.hs_norm_sqr());
        assert!(rep.e.min() > 1.0 - 1e-9);
    }

    #[test]
    fn tf_shift_mask_closed_form() {
        let n = 16;
        let lat = TfLattice::new(n, 2, 4).unwrap();
        let g = gauss_window(n, 1.0).unwrap();
        let h = gauss_window(n, 0.7).unwrap();
        let (b1, nu1) = (3i64, 2i64);
        let op = tf_shift_matrix(n, b1, nu1);
        let m = best_gm_mask(&op, g.signal(), h.signal(), &lat).unwrap();
        let v = stft(h.signal(), g.signal()).unwrap();
        let u = u_function(g.signal(), h.signal(), &lat).unwrap();
        let roots = Roots::new(n);
        let amp = v.get(b1, nu1).conj() * ((lat.a() * lat.b()) as f64 / n as f64) / u.get(b1 as usize, nu1 as usize);
        for mi in 0..lat.m_count() {
            for ni in 0..lat.k_count() {
                let phase = roots.pow(2 * mi as i64 * nu1 - 4 * ni as i64 * b1);
                assert!((m.get(mi, ni) - amp * phase).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn riesz_failure_and_pinv() {
        // an impulse window gives 𝒱 supported on lag 0, so 𝒰 vanishes off lag 0
        let d = Signal::delta(8, 0);
        let lat = TfLattice::new(8, 2, 2).unwrap();
        let op = LinOp::identity(8);
        match best_gm_mask(&op, &d, &d, &lat) {
            Err(TfError::RieszFailure { point, value }) => {
                assert_eq!(point.0, 1);
                assert_eq!(value, 0.0);
            }
            other => panic!("expected Riesz failure, got {other:?}"),
        }
        let fit = fit_gm(&spreading_from_kernel(&op), &d, &d, &lat, true).unwrap();
        assert!(!fit.zero_filled.is_empty());
    }

    #[test]
    fn error_identities_on_random_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let lat = TfLattice::new(16, 4, 2).unwrap();
        let g = gauss_window(16, 1.0).unwrap();
        let h = gauss_window(16, 1.3).unwrap();
        let op = rand_op(&mut rng, 16);
        let rep = gm_error_and_bound(&op, g.signal(), h.signal(), &lat, false).unwrap();
        assert!((rep.err_hs2 - rep.fold_err).abs() < 1e-9 * rep.err_hs2);
        assert!(rep.err_hs2 <= rep.bound * (1.0 + 1e-9));
        assert!(rep.e.min() >= 0.0 && rep.e.max() <= 1.0);
        let zero = gm_error_and_bound(&LinOp::zeros(16), g.signal(), h.signal(), &lat, false).unwrap();
        assert_eq!(zero.err_hs2, 0.0);
    }

    #[test]
    fn underspread_classification() {
        assert!(underspread_check(&PhaseMap::delta(8, 0, 0), 0, 0).unwrap());
        let mut eta = PhaseMap::zeros(64);
        eta.set(-3, 3, c(1.0, 0.0));
        eta.set(2, -1, c(0.5, 0.0));
        assert!(underspread_check(&eta, 3, 3).unwrap());
        eta.set(8, -8, c(0.1, 0.0));
        assert!(!underspread_check(&eta, 8, 8).unwrap());
        match underspread_check(&eta, 3, 3) {
            Err(TfError::SupportViolation { indices }) => assert_eq!(indices, vec![(8, 56)]),
            other => panic!("expected support violation, got {other:?}"),
        }
    }
}
