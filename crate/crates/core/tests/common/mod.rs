#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfop::tfr::tf_shift;
use tfop::{LinOp, PhaseMap, Signal, TfLattice, Window};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn rand_signal(rng: &mut ChaCha8Rng, n: usize) -> Signal {
    Signal::new((0..n).map(|_| rand_c(rng)).collect()).unwrap()
}

pub fn rand_window(rng: &mut ChaCha8Rng, n: usize, tag: &str) -> Window {
    Window::new(rand_signal(rng, n), tag).unwrap()
}

pub fn rand_op(rng: &mut ChaCha8Rng, n: usize) -> LinOp {
    LinOp::new(DMatrix::from_fn(n, n, |_, _| rand_c(rng))).unwrap()
}

pub fn rand_map(rng: &mut ChaCha8Rng, n: usize) -> PhaseMap {
    PhaseMap::from_fn(n, |_, _| rand_c(rng))
}

/// Lattice points `(m·a, n·b)` in the order `m·K + n`.
pub fn lattice_points(lat: &TfLattice) -> Vec<(i64, i64)> {
    (0..lat.m_count())
        .flat_map(|m| (0..lat.k_count()).map(move |n| ((m * lat.a()) as i64, (n * lat.b()) as i64)))
        .collect()
}

/// `f ↦ ⟨f, π(λ)g⟩·π(λ)h`.
pub fn projection(g: &Signal, h: &Signal, lam: (i64, i64)) -> LinOp {
    LinOp::rank_one(&tf_shift(lam.0, lam.1, g), &tf_shift(lam.0, lam.1, h)).unwrap()
}

pub fn vectorize(op: &LinOp) -> DVector<Complex64> {
    DVector::from_iterator(op.n() * op.n(), op.kernel().iter().cloned())
}

/// Columns are the vectorized operators.
pub fn stack(ops: &[LinOp]) -> DMatrix<Complex64> {
    let cols: Vec<DVector<Complex64>> = ops.iter().map(vectorize).collect();
    DMatrix::from_columns(&cols)
}

pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Least-squares coefficients of `target` over the columns of `a`, through
/// the normal equations solved by an SVD pseudo-inverse.
pub fn least_squares(a: &DMatrix<Complex64>, target: &DVector<Complex64>) -> DVector<Complex64> {
    let gram = a.adjoint() * a;
    let rhs = a.adjoint() * target;
    let svd = gram.svd(true, true);
    svd.solve(&rhs, 1e-12 * svd.singular_values.max()).unwrap()
}

pub fn from_vector(n: usize, v: &DVector<Complex64>) -> LinOp {
    LinOp::new(DMatrix::from_column_slice(n, n, v.as_slice())).unwrap()
}
