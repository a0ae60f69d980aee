//! Library side of the `tfop` command-line tool: operator generators and
//! approximation sweeps shared by the binary and its tests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiment;
pub mod ops;
