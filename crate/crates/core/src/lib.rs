//! Rank-one decompositions of positive semidefinite matrices under an l1
//! cost, and randomized lower-bound certificates for the worst-case ratio
//! between that cost and the entrywise 1-norm.
//!
//! - [`linalg`]: dense symmetric matrices, Jacobi eigensolver, l1 projection.
//! - [`decompose`]: eigenvector and greedy-peeling decompositions.
//! - [`bounds`]: exact and heuristic solvers for the l1-ball quadratic
//!   maximum, PSD witnesses, the dual upper bound, ratio certificates.
//! - [`randcert`]: Rademacher ensembles, spectral statistics, restricted
//!   submatrix norms.
//! - [`experiments`]: the comparison, scaling and random-matrix studies behind the CLI.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod decompose;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod randcert;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::GramMatrix;
pub use rng::Rng;
