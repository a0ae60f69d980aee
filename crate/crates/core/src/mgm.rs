//! Multiple Gabor multipliers `𝕄 = Σ_j 𝕄_{m_j; g, h_j}`, the pointwise Gram
//! field `Γ`, the adjoint-lattice coefficient system and tensor projection
//! frames.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_len, Result, TfError};
use crate::frame::{dual_window, frame_bounds, FrameBounds};
use crate::gm::{
    coset, gm_apply, gm_matrix, mask_from_transfer, relative_error, transfer_function, FoldedQuotient, Mask,
};
use crate::lattice::TfLattice;
use crate::linop::{LinOp, PhaseMap};
use crate::roots::Roots;
use crate::signal::{Signal, Window};
use crate::spread::spreading_from_kernel;
use crate::sum::ComplexSum;
use crate::tfr::{gabor_analysis, gabor_synthesis, stft, tf_shift, GaborCoeffs};

/// Condition number above which a pointwise Gram matrix counts as singular.
pub const GAMMA_CONDITION_LIMIT: f64 = 1e12;

/// Relative frame-bound ratio below which a factor is not a frame.
pub const FRAME_RATIO_LIMIT: f64 = 1e-10;

/// One analysis window and `J` synthesis windows on a common lattice.
#[derive(Debug, Clone)]
pub struct WindowSet {
    g: Window,
    hs: Vec<Window>,
    lat: TfLattice,
}

impl WindowSet {
    pub fn new(g: Window, hs: Vec<Window>, lat: TfLattice) -> Result<Self> {
        if hs.is_empty() {
            return Err(TfError::InvalidParameter(
                "window set needs at least one synthesis window".into(),
            ));
        }
        lat.check_n(g.len())?;
        for h in &hs {
            check_len(g.len(), h.len())?;
        }
        Ok(WindowSet { g, hs, lat })
    }

    /// Synthesis windows `π(μ_j)h` for a list of shifts `μ_j`.
    pub fn shifted(g: Window, h: &Window, shifts: &[(i64, i64)], lat: TfLattice) -> Result<Self> {
        let hs = shifts
            .iter()
            .map(|&(c, d)| Window::new(tf_shift(c, d, h.signal()), format!("{} shifted ({c}, {d})", h.tag())))
            .collect::<Result<Vec<_>>>()?;
        WindowSet::new(g, hs, lat)
    }

    pub fn g(&self) -> &Window {
        &self.g
    }

    pub fn hs(&self) -> &[Window] {
        &self.hs
    }

    pub fn lattice(&self) -> &TfLattice {
        &self.lat
    }

    pub fn len(&self) -> usize {
        self.hs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hs.is_empty()
    }

    /// Number of rank-one projections in the family, `J·M·K`.
    pub fn rank(&self) -> usize {
        self.hs.len() * self.lat.size()
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }
}

/// One mask per synthesis window, tagged with the window description.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    masks: Vec<Mask>,
    tags: Vec<String>,
}

impl MaskSet {
    pub fn new(masks: Vec<Mask>, tags: Vec<String>) -> Result<Self> {
        check_len(masks.len(), tags.len())?;
        let first = masks
            .first()
            .ok_or_else(|| TfError::InvalidParameter("mask set must not be empty".into()))?;
        if masks.iter().any(|m| m.lattice() != first.lattice()) {
            return Err(TfError::Lattice("masks of a set must share one lattice".into()));
        }
        Ok(MaskSet { masks, tags })
    }

    pub fn for_windows(masks: Vec<Mask>, ws: &WindowSet) -> Result<Self> {
        MaskSet::new(masks, ws.hs.iter().map(|h| h.tag().to_string()).collect())
    }

    pub fn masks(&self) -> &[Mask] {
        &self.masks
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn max_abs_diff(&self, other: &MaskSet) -> f64 {
        self.masks
            .iter()
            .zip(&other.masks)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

fn check_masks(ms: &MaskSet, ws: &WindowSet) -> Result<()> {
    check_len(ws.len(), ms.len())?;
    if ms.masks[0].lattice() != ws.lattice() {
        return Err(TfError::Lattice("mask lattice differs from window-set lattice".into()));
    }
    Ok(())
}

pub fn mgm_apply(ms: &MaskSet, ws: &WindowSet, f: &Signal) -> Result<Signal> {
    check_masks(ms, ws)?;
    let c = gabor_analysis(f, ws.g.signal(), &ws.lat)?;
    let mut out = Signal::zeros(ws.n());
    for (m, h) in ms.masks.iter().zip(&ws.hs) {
        let cj = GaborCoeffs::new(c.data().component_mul(m.data()), ws.lat)?;
        out = out.add(&gabor_synthesis(&cj, h.signal())?)?;
    }
    Ok(out)
}

pub fn mgm_matrix(ms: &MaskSet, ws: &WindowSet) -> Result<LinOp> {
    check_masks(ms, ws)?;
    let mut k = LinOp::zeros(ws.n());
    for (m, h) in ms.masks.iter().zip(&ws.hs) {
        k = k.add(&gm_matrix(m, ws.g.signal(), h.signal())?)?;
    }
    Ok(k)
}

/// `η = (1/N)·Σ_j ℳ_j^{(d)}·𝒱_g h_j`.
pub fn mgm_spreading(ms: &MaskSet, ws: &WindowSet) -> Result<PhaseMap> {
    check_masks(ms, ws)?;
    let n = ws.n();
    let scale = 1.0 / n as f64;
    let mut eta = PhaseMap::zeros(n);
    for (m, h) in ms.masks.iter().zip(&ws.hs) {
        let t = transfer_function(m);
        let v = stft(h.signal(), ws.g.signal())?;
        eta = eta.add(&PhaseMap::from_fn(n, |b, nu| t.periodic(b, nu) * v.at(b, nu) * scale))?;
    }
    Ok(eta)
}

/// Pointwise `J × J` Gram matrices over `□`, stored row-major by point.
#[derive(Debug, Clone)]
pub struct GammaField {
    data: Vec<DMatrix<Complex64>>,
    lat: TfLattice,
    j: usize,
}

/// Extreme eigenvalues of a [`GammaField`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSpectrum {
    pub min: f64,
    pub max: f64,
    pub argmin: (usize, usize),
    /// Largest pointwise condition number.
    pub condition: f64,
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect()
}

impl GammaField {
    pub fn lattice(&self) -> &TfLattice {
        &self.lat
    }

    pub fn window_count(&self) -> usize {
        self.j
    }

    pub fn shape(&self) -> (usize, usize) {
        self.lat.quotient_shape()
    }

    pub fn get(&self, lag: usize, doppler: usize) -> &DMatrix<Complex64> {
        let (_, c) = self.shape();
        &self.data[lag * c + doppler]
    }

    /// Eigenvalues of every pointwise matrix, point-major.
    pub fn eigenvalues(&self) -> Vec<Vec<f64>> {
        self.data.par_iter().map(hermitian_eigenvalues).collect()
    }

    pub fn spectrum(&self) -> GammaSpectrum {
        let (_, c) = self.shape();
        let mut s = GammaSpectrum {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            argmin: (0, 0),
            condition: 0.0,
        };
        for (i, ev) in self.eigenvalues().iter().enumerate() {
            let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if lo < s.min {
                s.min = lo;
                s.argmin = (i / c, i % c);
            }
            s.max = s.max.max(hi);
            let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            s.condition = s.condition.max(cond);
        }
        s
    }
}

fn stfts(ws: &WindowSet) -> Result<Vec<PhaseMap>> {
    ws.hs.iter().map(|h| stft(h.signal(), ws.g.signal())).collect()
}

fn gamma_from_stfts(v: &[PhaseMap], lat: &TfLattice) -> GammaField {
    let (r, c) = lat.quotient_shape();
    let j = v.len();
    let data = (0..r * c)
        .into_par_iter()
        .map(|i| {
            let (p, q) = (i / c, i % c);
            DMatrix::from_fn(j, j, |j0, j1| {
                let mut s = ComplexSum::default();
                for (x, y) in coset(lat, p, q) {
                    s.add(v[j0].at(x, y).conj() * v[j1].at(x, y));
                }
                s.value()
            })
        })
        .collect();
    GammaField { data, lat: *lat, j }
}

/// `Γ_{jj′}(p) = Σ_{z ∈ p+Λ°} conj(𝒱_g h_j(z))·𝒱_g h_{j′}(z)`.
pub fn gamma_field(ws: &WindowSet) -> Result<GammaField> {
    Ok(gamma_from_stfts(&stfts(ws)?, &ws.lat))
}

/// Solve `Γ(p)·x = rhs` through the Hermitian eigendecomposition.
fn solve_point(
    gamma: &DMatrix<Complex64>,
    rhs: &DVector<Complex64>,
    point: (usize, usize),
) -> Result<DVector<Complex64>> {
    let sym = (gamma + gamma.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || hi / lo > GAMMA_CONDITION_LIMIT {
        return Err(TfError::RieszFailure { point, value: lo });
    }
    let u = &eig.eigenvectors;
    let mut y = u.adjoint() * rhs;
    for (yi, lam) in y.iter_mut().zip(eig.eigenvalues.iter()) {
        *yi /= *lam;
    }
    Ok(u * y)
}

/// Transfer functions from pointwise Gram systems with right-hand side
/// `ℬ_j(p) = Σ η·conj(𝒱_g h_j)`.
fn solve_field(gamma: &GammaField, eta: &PhaseMap, v: &[PhaseMap]) -> Result<Vec<FoldedQuotient<Complex64>>> {
    let lat = gamma.lat;
    let (r, c) = lat.quotient_shape();
    let n = eta.n() as f64;
    let solved: Vec<DVector<Complex64>> = (0..r * c)
        .into_par_iter()
        .map(|i| {
            let (p, q) = (i / c, i % c);
            let rhs = DVector::from_fn(v.len(), |j, _| {
                let mut s = ComplexSum::default();
                for (x, y) in coset(&lat, p, q) {
                    s.add(eta.at(x, y) * v[j].at(x, y).conj());
                }
                s.value()
            });
            solve_point(&gamma.data[i], &rhs, (p, q)).map(|x| x * Complex64::new(n, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..v.len())
        .map(|j| FoldedQuotient::from_fn(lat, |p, q| solved[p * c + q][j]))
        .collect())
}

/// Masks of the best Hilbert-Schmidt approximation of `op` by an MGM.
pub fn best_mgm(op: &LinOp, ws: &WindowSet) -> Result<MaskSet> {
    check_len(ws.n(), op.n())?;
    let v = stfts(ws)?;
    let gamma = gamma_from_stfts(&v, &ws.lat);
    let transfers = solve_field(&gamma, &spreading_from_kernel(op), &v)?;
    MaskSet::for_windows(transfers.iter().map(mask_from_transfer).collect(), ws)
}

/// Approximation quality of the best MGM.
#[derive(Debug, Clone)]
pub struct MgmReport {
    pub masks: MaskSet,
    pub approx: LinOp,
    pub err_hs2: f64,
    pub err_rel: f64,
    pub rank: usize,
}

pub fn mgm_error(op: &LinOp, ws: &WindowSet) -> Result<MgmReport> {
    let masks = best_mgm(op, ws)?;
    let approx = mgm_matrix(&masks, ws)?;
    Ok(MgmReport {
        err_hs2: op.sub(&approx)?.hs_norm_sqr(),
        err_rel: relative_error(op, &approx)?,
        rank: ws.rank(),
        masks,
        approx,
    })
}

/// Coefficient functions `𝒜_Δ` for synthesis windows on adjoint-lattice
/// shifts `μ_j` of one window `h`, and the Gram field they assemble.
#[derive(Debug, Clone)]
pub struct AdjointSystem {
    pub shifts: Vec<(i64, i64)>,
    /// `𝒜_Δ` for every difference `Δ = μ_{j′} − μ_j`, keyed by `(Δ_lag, Δ_doppler)` mod N.
    pub coefficients: Vec<((usize, usize), FoldedQuotient<Complex64>)>,
    pub gamma: GammaField,
}

impl AdjointSystem {
    pub fn coefficient(&self, delta: (i64, i64)) -> Option<&FoldedQuotient<Complex64>> {
        let n = self.gamma.lat.n() as i64;
        let key = (delta.0.rem_euclid(n) as usize, delta.1.rem_euclid(n) as usize);
        self.coefficients.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }
}

/// `𝒜_Δ(p) = Σ_{z=(β,ν) ∈ p+Λ°} ω^{−Δ_lag·ν}·conj(𝒱_g h(z))·𝒱_g h(z − Δ)`;
/// then `Γ_{jj′}(p) = ω^{c_{j′}(d_{j′} − d_j)}·𝒜_{μ_{j′} − μ_j}(p)` for `μ_j = (c_j, d_j)`.
pub fn adjoint_lattice_system(g: &Signal, h: &Signal, lat: &TfLattice, shifts: &[(i64, i64)]) -> Result<AdjointSystem> {
    check_len(g.len(), h.len())?;
    lat.check_n(g.len())?;
    if shifts.is_empty() {
        return Err(TfError::InvalidParameter("shift list must not be empty".into()));
    }
    if let Some(&(c, d)) = shifts.iter().find(|&&(c, d)| !lat.is_adjoint_point(c, d)) {
        return Err(TfError::Lattice(format!(
            "shift ({c}, {d}) is not on the adjoint lattice with steps {:?}",
            lat.adjoint_steps()
        )));
    }
    let n = lat.n();
    let ni = n as i64;
    let roots = Roots::new(n);
    let v = stft(h, g)?;
    let mut coefficients: Vec<((usize, usize), FoldedQuotient<Complex64>)> = Vec::new();
    for &(c0, d0) in shifts {
        for &(c1, d1) in shifts {
            let key = ((c1 - c0).rem_euclid(ni) as usize, (d1 - d0).rem_euclid(ni) as usize);
            if coefficients.iter().any(|(k, _)| *k == key) {
                continue;
            }
            let (dc, dd) = (key.0 as i64, key.1 as i64);
            let a = FoldedQuotient::from_fn(*lat, |p, q| {
                let mut s = ComplexSum::default();
                for (x, y) in coset(lat, p, q) {
                    let (xi, yi) = (x as i64, y as i64);
                    s.add(roots.pow(-dc * yi) * v.at(x, y).conj() * v.get(xi - dc, yi - dd));
                }
                s.value()
            });
            coefficients.push((key, a));
        }
    }
    let find = |key: (usize, usize)| {
        &coefficients
            .iter()
            .find(|(k, _)| *k == key)
            .expect("difference present")
            .1
    };
    let (r, cq) = lat.quotient_shape();
    let j = shifts.len();
    let data = (0..r * cq)
        .map(|i| {
            let (p, q) = (i / cq, i % cq);
            DMatrix::from_fn(j, j, |j0, j1| {
                let (c0, d0) = shifts[j0];
                let (c1, d1) = shifts[j1];
                let key = ((c1 - c0).rem_euclid(ni) as usize, (d1 - d0).rem_euclid(ni) as usize);
                roots.pow(c1 * (d1 - d0)) * find(key).get(p, q)
            })
        })
        .collect();
    Ok(AdjointSystem {
        shifts: shifts.to_vec(),
        gamma: GammaField { data, lat: *lat, j },
        coefficients,
    })
}

/// Best MGM masks obtained through the adjoint-lattice coefficient system.
pub fn best_mgm_adjoint(
    op: &LinOp,
    g: &Signal,
    h: &Signal,
    lat: &TfLattice,
    shifts: &[(i64, i64)],
) -> Result<Vec<Mask>> {
    check_len(g.len(), op.n())?;
    let system = adjoint_lattice_system(g, h, lat, shifts)?;
    let n = lat.n();
    let roots = Roots::new(n);
    let v = stft(h, g)?;
    // 𝒱_g(π(c,d)h)(β,ν) = ω^{−c(ν−d)}·𝒱_g h(β−c, ν−d)
    let vj: Vec<PhaseMap> = shifts
        .iter()
        .map(|&(c, d)| {
            PhaseMap::from_fn(n, |b, nu| {
                roots.pow(-c * (nu as i64 - d)) * v.get(b as i64 - c, nu as i64 - d)
            })
        })
        .collect();
    let transfers = solve_field(&system.gamma, &spreading_from_kernel(op), &vj)?;
    Ok(transfers.iter().map(mask_from_transfer).collect())
}

/// Gabor multiplier sum `Σ_j` with explicit windows, for callers that hold
/// raw signals rather than a [`WindowSet`].
pub fn mgm_apply_signals(masks: &[Mask], g: &Signal, hs: &[Signal], f: &Signal) -> Result<Signal> {
    check_len(masks.len(), hs.len())?;
    let mut out = Signal::zeros(f.len());
    for (m, h) in masks.iter().zip(hs) {
        out = out.add(&gm_apply(m, g, h, f)?)?;
    }
    Ok(out)
}

/// Bounds of the tensor frame `{P_{λ,μ}}`: products of the factor bounds.
pub fn tensor_frame_bounds(g: &Signal, lat1: &TfLattice, h: &Signal, lat2: &TfLattice) -> Result<FrameBounds> {
    let fg = frame_bounds(g, lat1)?;
    let fh = frame_bounds(h, lat2)?;
    Ok(FrameBounds {
        lower: fg.lower * fh.lower,
        upper: fg.upper * fh.upper,
    })
}

/// Coefficients of `H = Σ c(λ,μ)·P_{λ,μ}`, `P_{λ,μ}f = ⟨f, π(λ)g⟩·π(μ)h`.
///
/// Rows index `λ ∈ lat1` as `m·K₁ + n`, columns `μ ∈ lat2` likewise.
#[derive(Debug, Clone)]
pub struct ProjectionExpansion {
    pub coeffs: DMatrix<Complex64>,
    pub g: Signal,
    pub h: Signal,
    pub lat1: TfLattice,
    pub lat2: TfLattice,
}

fn require_frame(w: &Signal, lat: &TfLattice) -> Result<()> {
    let fb = frame_bounds(w, lat)?;
    if !(fb.lower > FRAME_RATIO_LIMIT * fb.upper) {
        return Err(TfError::FrameFailure {
            smallest_eigenvalue: fb.lower,
            condition: fb.condition(),
        });
    }
    Ok(())
}

/// `c(λ,μ) = ⟨H π(λ)g̃, π(μ)h̃⟩` with canonical duals `g̃`, `h̃`.
pub fn projection_frame_expand(
    op: &LinOp,
    g: &Signal,
    h: &Signal,
    lat1: &TfLattice,
    lat2: &TfLattice,
) -> Result<ProjectionExpansion> {
    check_len(op.n(), g.len())?;
    check_len(op.n(), h.len())?;
    require_frame(g, lat1)?;
    require_frame(h, lat2)?;
    let gd = dual_window(&Window::new(g.clone(), "g")?, lat1)?;
    let hd = dual_window(&Window::new(h.clone(), "h")?, lat2)?;
    let k1 = lat1.k_count();
    let rows: Vec<Vec<Complex64>> = (0..lat1.size())
        .into_par_iter()
        .map(|l| {
            let atom = tf_shift(((l / k1) * lat1.a()) as i64, ((l % k1) * lat1.b()) as i64, gd.signal());
            let x = op.apply(&atom)?;
            let c = gabor_analysis(&x, hd.signal(), lat2)?;
            Ok(c.data().transpose().iter().cloned().collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let coeffs = DMatrix::from_fn(lat1.size(), lat2.size(), |l, m| rows[l][m]);
    Ok(ProjectionExpansion {
        coeffs,
        g: g.clone(),
        h: h.clone(),
        lat1: *lat1,
        lat2: *lat2,
    })
}

impl ProjectionExpansion {
    /// Kernel of `Σ c(λ,μ)·P_{λ,μ}`.
    pub fn synthesize(&self) -> Result<LinOp> {
        let n = self.g.len();
        let k1 = self.lat1.k_count();
        let k2 = self.lat2.k_count();
        let mut kernel = DMatrix::zeros(n, n);
        for l in 0..self.lat1.size() {
            let row = DMatrix::from_fn(self.lat2.m_count(), k2, |m, k| self.coeffs[(l, m * k2 + k)]);
            let left = gabor_synthesis(&GaborCoeffs::new(row, self.lat2)?, &self.h)?;
            let right = tf_shift(
                ((l / k1) * self.lat1.a()) as i64,
                ((l % k1) * self.lat1.b()) as i64,
                &self.g,
            );
            for t in 0..n {
                for s in 0..n {
                    kernel[(t, s)] += left[t] * right[s].conj();
                }
            }
        }
        Ok(LinOp::from_matrix_unchecked(kernel))
    }
}
