mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use tfop::frame::frame_operator;
use tfop::gm::{gm_error_and_bound, Mask};
use tfop::mgm::{
    best_mgm, best_mgm_adjoint, gamma_field, mgm_error, mgm_matrix, projection_frame_expand, tensor_frame_bounds,
    MaskSet, WindowSet,
};
use tfop::tfr::tf_shift;
use tfop::{gauss_window, hs_inner, LinOp, Signal, TfError, TfLattice, Window};

fn family(ws: &WindowSet) -> Vec<LinOp> {
    ws.hs()
        .iter()
        .flat_map(|h| {
            lattice_points(ws.lattice())
                .into_iter()
                .map(move |l| projection(ws.g().signal(), h.signal(), l))
        })
        .collect()
}

#[test]
fn gamma_spectrum_matches_gram_of_projections() {
    let mut r = rng(200);
    let lat = TfLattice::new(8, 2, 2).unwrap();
    for j in [2, 3] {
        let g = gauss_window(8, 1.0).unwrap();
        let hs = (0..j).map(|i| rand_window(&mut r, 8, &format!("h{i}"))).collect();
        let ws = WindowSet::new(g, hs, lat).unwrap();
        let a = stack(&family(&ws));
        let gram_ev = hermitian_eigenvalues(&(a.adjoint() * &a));
        let scale = lat.size() as f64 / 8.0;
        let mut want: Vec<f64> = gamma_field(&ws)
            .unwrap()
            .eigenvalues()
            .into_iter()
            .flatten()
            .map(|x| x * scale)
            .collect();
        want.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let top = *want.last().unwrap();
        for (x, y) in want.iter().zip(&gram_ev) {
            assert!((x - y).abs() < 1e-10 * top);
        }
    }
}

#[test]
fn gamma_positivity_iff_gram_definite() {
    let mut r = rng(201);
    let lat = TfLattice::new(8, 2, 2).unwrap();
    let g = gauss_window(8, 1.0).unwrap();
    let h0 = rand_window(&mut r, 8, "h0");
    let h1 = rand_window(&mut r, 8, "h1");
    let combo = Window::new(h0.signal().add(&h1.signal().scale(c(0.5, -1.0))).unwrap(), "combo").unwrap();
    let cases = vec![
        vec![h0.clone(), h1.clone()],
        vec![h0.clone(), h1.clone(), rand_window(&mut r, 8, "h2")],
        vec![h0.clone(), h0.clone()],
        vec![h0.clone(), h1.clone(), combo],
    ];
    let mut seen = (false, false);
    for hs in cases {
        let ws = WindowSet::new(g.clone(), hs, lat).unwrap();
        let spec = gamma_field(&ws).unwrap().spectrum();
        let gamma_ok = spec.min > 1e-10 * spec.max;
        let a = stack(&family(&ws));
        let ev = hermitian_eigenvalues(&(a.adjoint() * &a));
        let gram_ok = ev[0] > 1e-10 * ev[ev.len() - 1];
        assert_eq!(gamma_ok, gram_ok);
        if gamma_ok {
            seen.0 = true;
        } else {
            seen.1 = true;
        }
    }
    assert_eq!(seen, (true, true));
}

#[test]
fn best_mgm_matches_stacked_normal_equations() {
    let mut r = rng(202);
    for (j, a, b) in [(2, 2, 2), (2, 4, 2), (3, 2, 4)] {
        let lat = TfLattice::new(8, a, b).unwrap();
        let g = gauss_window(8, 1.0).unwrap();
        let hs = (0..j).map(|i| rand_window(&mut r, 8, &format!("h{i}"))).collect();
        let ws = WindowSet::new(g, hs, lat).unwrap();
        let op = rand_op(&mut r, 8);
        let a_mat = stack(&family(&ws));
        let x = least_squares(&a_mat, &vectorize(&op));
        let oracle_err = op.sub(&from_vector(8, &(&a_mat * &x))).unwrap().hs_norm_sqr();
        let rep = mgm_error(&op, &ws).unwrap();
        assert!((rep.err_hs2 - oracle_err).abs() < 1e-9 * oracle_err);
        assert_eq!(rep.rank, j * lat.size());
        let resid = op.sub(&rep.approx).unwrap();
        for p in family(&ws) {
            assert!(hs_inner(&resid, &p).unwrap().norm() < 1e-9 * op.hs_norm());
        }
    }
}

#[test]
fn mask_set_recovery() {
    let mut r = rng(203);
    let lat = TfLattice::new(16, 2, 4).unwrap();
    let g = gauss_window(16, 1.0).unwrap();
    let hs: Vec<Window> = (0..3).map(|i| rand_window(&mut r, 16, &format!("h{i}"))).collect();
    let ws = WindowSet::new(g, hs, lat).unwrap();
    let masks = (0..3).map(|_| Mask::from_fn(lat, |_, _| rand_c(&mut r))).collect();
    let ms = MaskSet::for_windows(masks, &ws).unwrap();
    let op = mgm_matrix(&ms, &ws).unwrap();
    assert!(best_mgm(&op, &ws).unwrap().max_abs_diff(&ms) < 1e-9);
}

#[test]
fn larger_window_set_never_worse() {
    let mut r = rng(204);
    for _ in 0..10 {
        let lat = TfLattice::new(16, 4, 4).unwrap();
        let g = gauss_window(16, 1.0).unwrap();
        let h = gauss_window(16, 0.8).unwrap();
        let op = rand_op(&mut r, 16);
        let gm = gm_error_and_bound(&op, g.signal(), h.signal(), &lat, false).unwrap();
        let ws = WindowSet::new(g, vec![h, rand_window(&mut r, 16, "extra")], lat).unwrap();
        let mgm = mgm_error(&op, &ws).unwrap();
        assert!(mgm.err_hs2 <= gm.err_hs2 * (1.0 + 1e-12));
    }
}

#[test]
fn adjoint_system_reproduces_best_mgm() {
    let mut r = rng(205);
    let lat = TfLattice::new(8, 2, 2).unwrap();
    let g = gauss_window(8, 1.0).unwrap();
    let h = rand_window(&mut r, 8, "h");
    for shifts in [vec![(0, 0)], vec![(0, 0), (4, 0)], vec![(0, 0), (4, 0), (0, 4)]] {
        let op = rand_op(&mut r, 8);
        let ws = WindowSet::shifted(g.clone(), &h, &shifts, lat).unwrap();
        let direct = best_mgm(&op, &ws).unwrap();
        let via_a = best_mgm_adjoint(&op, g.signal(), h.signal(), &lat, &shifts).unwrap();
        for (x, y) in direct.masks().iter().zip(&via_a) {
            assert!(x.max_abs_diff(y) < 1e-9);
        }
    }
}

#[test]
fn projection_frame_member_and_identity() {
    let mut r = rng(206);
    let n = 8;
    let g = gauss_window(n, 1.0).unwrap();
    let h = gauss_window(n, 1.3).unwrap();
    let lat1 = TfLattice::new(n, 2, 2).unwrap();
    let lat2 = TfLattice::new(n, 2, 1).unwrap();
    let (lam, mu) = ((2i64, 4i64), (6i64, 3i64));
    let p = LinOp::rank_one(&tf_shift(lam.0, lam.1, g.signal()), &tf_shift(mu.0, mu.1, h.signal())).unwrap();
    let ex = projection_frame_expand(&p, g.signal(), h.signal(), &lat1, &lat2).unwrap();
    assert!(ex.synthesize().unwrap().max_abs_diff(&p) < 1e-9);

    // orthonormal box windows: duals equal the windows
    let boxed: Vec<Complex64> = (0..n).map(|t| c(if t < 4 { 0.5 } else { 0.0 }, 0.0)).collect();
    let bw = Signal::new(boxed).unwrap();
    let onb = TfLattice::new(n, 4, 2).unwrap();
    let id = LinOp::identity(n);
    let ex = projection_frame_expand(&id, &bw, &bw, &onb, &onb).unwrap();
    let pts = lattice_points(&onb);
    for (i, &l) in pts.iter().enumerate() {
        for (j, &m) in pts.iter().enumerate() {
            let want = tf_shift(l.0, l.1, &bw).inner(&tf_shift(m.0, m.1, &bw)).unwrap();
            assert!((ex.coeffs[(i, j)] - want).norm() < 1e-12);
        }
    }
    assert!(ex.synthesize().unwrap().max_abs_diff(&id) < 1e-9);
    let _ = rand_c(&mut r);
}

/// Frame operator of `{P_{λ,μ}}` acting on vectorized kernels.
fn tensor_frame_spectrum(g: &Signal, lat1: &TfLattice, h: &Signal, lat2: &TfLattice) -> (f64, f64) {
    let mut ops = Vec::new();
    for l in lattice_points(lat1) {
        for m in lattice_points(lat2) {
            ops.push(LinOp::rank_one(&tf_shift(l.0, l.1, g), &tf_shift(m.0, m.1, h)).unwrap());
        }
    }
    let a = stack(&ops);
    let ev = hermitian_eigenvalues(&(&a * a.adjoint()));
    (ev[0], ev[ev.len() - 1])
}

#[test]
fn tensor_frame_iff_factor_frames() {
    let n = 8;
    let boxed: Vec<Complex64> = (0..n).map(|t| c(if t < 4 { 0.5 } else { 0.0 }, 0.0)).collect();
    let bw = Signal::new(boxed).unwrap();
    let delta = Signal::delta(n, 0);
    let lat1 = TfLattice::new(n, 4, 2).unwrap();
    let h = gauss_window(n, 1.0).unwrap();
    let lat2 = TfLattice::new(n, 2, 2).unwrap();
    for t in [0.0, 0.5, 0.9, 1.0] {
        let g = bw.scale(c(1.0 - t, 0.0)).add(&delta.scale(c(t, 0.0))).unwrap();
        let (lo, hi) = tensor_frame_spectrum(&g, &lat1, h.signal(), &lat2);
        let tb = tensor_frame_bounds(&g, &lat1, h.signal(), &lat2).unwrap();
        assert!((lo - tb.lower).abs() < 1e-10 * hi);
        assert!((hi - tb.upper).abs() < 1e-10 * hi);
        let sg = hermitian_eigenvalues(&frame_operator(&g, &lat1).unwrap());
        let factor_frame = sg[0] > 1e-10 * sg[sg.len() - 1];
        assert_eq!(lo > 1e-10 * hi, factor_frame, "t = {t}");
        assert_eq!(factor_frame, t < 1.0);
        let op = LinOp::identity(n);
        let res = projection_frame_expand(&op, &g, h.signal(), &lat1, &lat2);
        assert_eq!(res.is_ok(), factor_frame);
        if !factor_frame {
            assert!(matches!(res, Err(TfError::FrameFailure { .. })));
        }
    }
    let _ = DMatrix::<f64>::zeros(1, 1);
}
