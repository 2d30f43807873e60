//! Polynomially preconditioned Krylov methods for the action of the matrix
//! inverse square root, square root and sign function on a vector.
//!
//! The library extracts Arnoldi approximations for `f(A)b` from Krylov
//! subspaces of the preconditioned operator `A q(A)^2`, where `q` is a
//! polynomial approximation to `z^{-1/2}`. Three interchangeable strategies
//! construct `q`:
//!
//! * truncated Chebyshev expansions on a positive spectral interval,
//! * interpolation at (harmonic) Ritz values in Newton form with Leja
//!   ordering,
//! * discrete least-squares fits on a contour enclosing the Ritz values.
//!
//! Each strategy implements the [`poly::PrecondPoly`] trait and is
//! registered by name in [`poly::registry`], so drivers and the `polyprec`
//! CLI select them at runtime from configuration.
//!
//! Modules:
//!
//! * [`linalg`] — dense kernels on small matrices (Schur, principal square
//!   root, tridiagonal eigensolver, least squares).
//! * [`operators`] — CSR sparse matrices, instrumented linear operators,
//!   model problems, Matrix Market I/O.
//! * [`krylov`] — Arnoldi and Lanczos processes, Ritz extraction, two-pass
//!   reconstruction.
//! * [`poly`] — the preconditioning-polynomial strategies and branch-safety
//!   certification.
//! * [`funm`] — the driver algorithms, stopping criteria, condition-number
//!   analysis and dense reference oracles.
//! * [`cli`] — scenario files, CSV emission and the batch experiment runner.

pub mod cli;
pub mod error;
pub mod funm;
pub mod krylov;
pub mod linalg;
pub mod operators;
pub mod poly;

pub use error::{Error, Result};

/// Scalar type used throughout: double-precision complex.
pub type Scalar = num_complex::Complex64;
