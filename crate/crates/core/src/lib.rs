//! Time-frequency representation and approximation of operators on `C^N`.
//!
//! Operators are handled through their kernels ([`LinOp`]) and spreading
//! functions ([`PhaseMap`]). The [`gm`], [`mgm`] and [`tst`] modules compute
//! best Hilbert-Schmidt approximations by Gabor multipliers, multiple Gabor
//! multipliers and twisted-spline-type structures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod frame;
pub mod gm;
pub mod io;
pub mod lattice;
pub mod linop;
pub mod mgm;
pub mod roots;
pub mod signal;
pub mod spread;
pub mod sum;
pub mod tfr;
pub mod tst;

pub use error::{Result, TfError};
pub use frame::{dual_window, frame_bounds, FrameBounds};
pub use lattice::TfLattice;
pub use linop::{hs_inner, LinOp, PhaseMap};
pub use signal::{gauss_window, Signal, Window};
pub use tfr::GaborCoeffs;
