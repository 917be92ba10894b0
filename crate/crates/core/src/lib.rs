//! Finite element solvers for parabolic integro-differential equations
//! (non-Fickian flow) whose time-history is compressed on the fly by an
//! incremental SVD.
//!
//! The memory term `∫₀ᵗ K(t−s) ℬu(s) ds` forces a conventional solver to keep
//! every past coefficient vector, so storage grows like `O(mN)` and the
//! history sums cost `O(mN²)`. Streaming each new solution through
//! [`isvd::IsvdState`] keeps the history as low-rank factors instead, with
//! storage `O((m+N)r)` and cost `O(mNr + rN²)`.
//!
//! Module map:
//! - [`la`]: dense/sparse matrices, Jacobi SVD, sparse solvers
//! - [`isvd`]: the streaming truncated SVD
//! - [`kernels`]: memory kernels and quadrature weights
//! - [`grid`]: time partitions
//! - [`fem`]: P1 elements on the unit square
//! - [`solver`]: Crank–Nicolson, BDF2-CQ and L1 time steppers, dense or compressed history
//! - [`bench`]: run configuration, tables, CSV/JSON output used by the `nfisvd` binary

pub mod bench;
pub mod error;
pub mod fem;
pub mod grid;
pub mod isvd;
pub mod kernels;
pub mod la;
pub mod solver;

pub use error::{Error, Result};
