//! Small deterministic numerical kernel: dense real matrices, a cyclic
//! Jacobi eigensolver, Cholesky solves and reproducible random streams.
//!
//! Matrices here never exceed a few dozen rows (twice the user count), so
//! everything is plain row-major `Vec<f64>` storage with no blocking.

mod cholesky;
mod eigen;
mod matrix;
mod rng;

pub use cholesky::{spd_solve, Cholesky};
pub use eigen::sym_eigenvalues;
pub use matrix::{axpy, dot, norm_sq, Matrix};
pub use rng::{sample_folded_normal, sample_normal, RngStream};
pub(crate) use rng::normal_iter;
