//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by the dense kernels, Krylov processes, polynomial
/// construction and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// QR iteration failed to deflate an eigenvalue within the sweep budget.
    #[error("eigenvalue iteration did not converge: {0}")]
    NonConvergence(String),

    /// An eigenvalue lies on the branch cut (-inf, 0] of the principal square root.
    #[error("eigenvalue {re}+{im}i lies on the branch cut (-inf, 0]")]
    BranchCutViolation { re: f64, im: f64 },

    /// The Parlett recurrence divides by a (near-)zero sum of square-rooted eigenvalues.
    #[error("near-defective eigenvalue pair: |sqrt(t_ii)+sqrt(t_jj)| = {0:.3e}")]
    ZeroDiagonalPair(f64),

    /// A triangular solve hit a pivot below tolerance.
    #[error("singular matrix: pivot magnitude {0:.3e}")]
    SingularMatrix(f64),

    /// Least-squares matrix is numerically rank deficient.
    #[error("rank-deficient least-squares matrix: pivot {0:.3e}")]
    RankDeficient(f64),

    /// Vector or matrix dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Matrix Market input could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },

    /// Matrix Market format variant we do not ingest.
    #[error("unsupported Matrix Market field: {0}")]
    UnsupportedField(String),

    /// Dense verification found an eigenvalue outside the open right half-plane.
    #[error("synthetic operator spectrum leaked into Re(z) <= 0: {re}+{im}i")]
    SpectrumLeak { re: f64, im: f64 },

    /// Krylov process started from a (numerically) zero vector.
    #[error("zero start vector")]
    ZeroStartVector,

    /// Harmonic Ritz extraction requires a nonsingular Hessenberg matrix.
    #[error("singular Hessenberg matrix in harmonic Ritz extraction")]
    SingularH,

    /// Chebyshev construction needs a positive interval.
    #[error("invalid interval [{a}, {b}]: need 0 < a < b")]
    InvalidInterval { a: f64, b: f64 },

    /// An interpolation node lies on the branch cut.
    #[error("interpolation node {re}+{im}i lies on the branch cut (-inf, 0]")]
    BranchCutNode { re: f64, im: f64 },

    /// Interpolation nodes too close for a stable Newton form.
    #[error("near-coincident interpolation nodes: min distance {0:.3e}")]
    NearCoincidentNodes(f64),

    /// Ritz values do not span a usable contour.
    #[error("degenerate contour from Ritz values")]
    DegenerateContour,

    /// A discretized contour node lies on the branch cut.
    #[error("contour node {re}+{im}i lies on the branch cut (-inf, 0]")]
    NodeOnBranchCut { re: f64, im: f64 },

    /// The stored orthonormal-basis recurrence broke down during evaluation.
    #[error("contour basis recurrence breakdown: |h| = {0:.3e}")]
    RecurrenceBreakdown(f64),

    /// A preconditioner node built for the square-root driver landed on the cut.
    #[error("Ritz node for square-root preconditioner on branch cut: {re}+{im}i")]
    BranchCutRitz { re: f64, im: f64 },

    /// Scenario file failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
