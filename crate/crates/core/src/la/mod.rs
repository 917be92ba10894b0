//! Dense and sparse linear algebra used throughout the crate.

pub mod dense;
pub mod solve;
pub mod sparse;
pub mod svd;

pub use dense::{axpy, dist2, dot, gemm, norm2, DenseMatrix};
pub use solve::{sparse_solve, spectral_radius, EnvelopeCholesky, Ilu0, LinearSolver};
pub use sparse::SparseCsr;
pub use svd::{svd_dense, SvdMode, SvdTriple};
