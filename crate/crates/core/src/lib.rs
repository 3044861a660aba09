//! Spectral solvers for the rotating-film operator family `L_eps` and its
//! limit `L_0`.
//!
//! Three independent routes compute the eigenvalues `lambda_{eps,n}`:
//!
//! * truncation of the tridiagonal Fourier-side matrix ([`routes::route_fourier`]),
//! * Nystrom discretization of the inverse integral operator ([`routes::route_nystrom`]),
//! * the exact limit spectrum `{1, 2, 3, ...}` backed by exact rational
//!   eigenpolynomials ([`limit`]).
//!
//! [`convergence`] holds the Hilbert-Schmidt and eigenvalue-convergence
//! experiments.

// `!(x > 0.0)` is the NaN-rejecting form used in argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence;
pub mod eigen;
pub mod error;
pub mod exec;
pub mod kernel;
pub mod limit;
pub mod quadrature;
pub mod routes;

pub use error::{Error, Result};
pub use exec::Execution;
pub use kernel::{Epsilon, Family};
