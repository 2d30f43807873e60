//! Driver algorithms: plain and left/right polynomially preconditioned
//! Arnoldi for `A^{-1/2} b`, the square root via `A^{-1/2}(Ab)` with
//! implicit desingularization, `sign(A) b = A (A^2)^{-1/2} b`, stopping
//! criteria, condition-number analysis and dense reference oracles.

mod condition;
mod drivers;
mod reference;

pub use condition::{condition_analysis, condition_analysis_spectrum, ConditionEstimate};
pub use drivers::{
    invsqrt_left_prec, invsqrt_plain, invsqrt_right_prec, run_invsqrt, sign_action, sqrt_action,
};
pub use reference::{hermitian_spectrum, reference_solution, OraclePath};

use crate::error::{Error, Result};
use crate::krylov::lanczos;
use crate::operators::LinearOperator;
use crate::poly::BranchCertificate;
use crate::Scalar;

/// Which Krylov driver to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Plain,
    LeftPrec,
    RightPrec,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Plain => "plain",
            Method::LeftPrec => "left_prec",
            Method::RightPrec => "right_prec",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plain" => Some(Method::Plain),
            "left_prec" => Some(Method::LeftPrec),
            "right_prec" => Some(Method::RightPrec),
            _ => None,
        }
    }
}

/// Which matrix function a scenario evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunmKind {
    InvSqrt,
    Sqrt,
    Sign,
}

impl FunmKind {
    pub fn name(self) -> &'static str {
        match self {
            FunmKind::InvSqrt => "invsqrt",
            FunmKind::Sqrt => "sqrt",
            FunmKind::Sign => "sign",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "invsqrt" => Some(FunmKind::InvSqrt),
            "sqrt" => Some(FunmKind::Sqrt),
            "sign" => Some(FunmKind::Sign),
            _ => None,
        }
    }
}

/// Configuration of one driver run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: Method,
    /// Registered polynomial strategy name; `None` for the plain method.
    pub poly_kind: Option<String>,
    /// `d` = polynomial degree + 1; the preconditioned operator costs
    /// `2d - 1` base applications per iteration. `d = 1` means plain.
    pub d: usize,
    pub max_iter: usize,
    /// Relative-difference stopping target.
    pub tol: f64,
    /// Checkpoint spacing; defaults to `max(1, 64 / d)`.
    pub check_every: Option<usize>,
    pub reorth: bool,
    pub seed: u64,
    /// Plain Hermitian path: use the Lanczos three-term recurrence.
    pub use_lanczos: bool,
    /// Discard the Lanczos basis and recombine in a second pass.
    pub two_pass: bool,
    /// Interpolate at harmonic instead of standard Ritz values.
    pub harmonic: bool,
    /// Right preconditioning: keep the vectors `y_j = q(A) v_j` (memory
    /// mode recomputes the final combination with one extra polynomial
    /// application instead).
    pub store_y: bool,
    /// Start the Ritz-harvest Arnoldi from a random vector instead of `b`.
    pub ritz_random_start: bool,
    /// Spectral interval for the Chebyshev strategy.
    pub interval: Option<(f64, f64)>,
    pub contour_min_abs: f64,
    pub contour_step: f64,
    /// Arnoldi steps harvesting Ritz values for the contour (0 = auto).
    pub contour_ritz_dim: usize,
}

impl RunConfig {
    pub fn plain(max_iter: usize, tol: f64, seed: u64) -> Self {
        RunConfig {
            method: Method::Plain,
            poly_kind: None,
            d: 1,
            max_iter,
            tol,
            check_every: None,
            reorth: false,
            seed,
            use_lanczos: false,
            two_pass: false,
            harmonic: false,
            store_y: true,
            ritz_random_start: false,
            interval: None,
            contour_min_abs: 0.1,
            contour_step: 0.005,
            contour_ritz_dim: 0,
        }
    }

    pub fn preconditioned(
        method: Method,
        poly_kind: &str,
        d: usize,
        max_iter: usize,
        tol: f64,
        seed: u64,
    ) -> Self {
        let mut cfg = Self::plain(max_iter, tol, seed);
        cfg.method = method;
        cfg.poly_kind = Some(poly_kind.to_string());
        cfg.d = d;
        cfg
    }

    /// `d >= 1`, and `method = plain` iff `poly_kind = none` iff `d = 1`.
    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        let plainish = self.method == Method::Plain;
        let no_poly = self.poly_kind.is_none();
        let d_one = self.d == 1;
        if plainish != no_poly || no_poly != d_one {
            return Err(Error::Config(format!(
                "method/poly/d must agree: plain <=> no polynomial <=> d = 1 \
                 (got method = {}, poly = {:?}, d = {})",
                self.method.name(),
                self.poly_kind,
                self.d
            )));
        }
        if let Some(name) = &self.poly_kind {
            if crate::poly::lookup(name).is_none() {
                return Err(Error::Config(format!(
                    "unknown polynomial strategy: {name}"
                )));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::Config("tol must be nonnegative".into()));
        }
        if self.two_pass && !self.use_lanczos {
            return Err(Error::Config("two_pass requires use_lanczos".into()));
        }
        if self.two_pass && self.method != Method::Plain {
            return Err(Error::Config("two_pass applies to the plain method".into()));
        }
        Ok(())
    }

    /// Checkpoint spacing: explicit, else `max(1, floor(64 / d))`.
    pub fn effective_check_every(&self) -> usize {
        self.check_every.unwrap_or_else(|| (64 / self.d).max(1))
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIter,
    Breakdown,
    Stagnation,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIter => "max_iter",
            Termination::Breakdown => "breakdown",
            Termination::Stagnation => "stagnation",
        }
    }

    /// Breakdown means the Krylov space became invariant and the iterate
    /// is exact on it; it counts as success.
    pub fn is_success(self) -> bool {
        matches!(self, Termination::Converged | Termination::Breakdown)
    }
}

/// One estimate checkpoint: the iterate difference
/// `||f_m - f_{m-k}|| / ||f_m||` recorded at iteration `m`, the true
/// relative error when an oracle is available, and the cumulative mvm
/// counter at that point.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub m: usize,
    pub est_rel_diff: f64,
    pub true_rel_err: Option<f64>,
    pub mvms_cumulative: u64,
}

/// Itemized matrix-vector products: polynomial setup (Ritz harvest plus
/// initial applications), the iteration phase, and finalization.
#[derive(Debug, Clone, Copy, Default)]
pub struct MvmBreakdown {
    pub setup: u64,
    pub iteration: u64,
    pub finalization: u64,
}

impl MvmBreakdown {
    pub fn total(&self) -> u64 {
        self.setup + self.iteration + self.finalization
    }
}

/// Everything a run reports.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub checkpoints: Vec<Checkpoint>,
    pub iterations: usize,
    pub mvms: u64,
    pub mvm_breakdown: MvmBreakdown,
    /// Raw mvms per application of the driver's base operator (1 for `A`,
    /// 2 for the squared operator of the sign driver).
    pub base_apply_factor: u64,
    pub d: usize,
    pub inner_products: u64,
    pub termination: Termination,
    pub branch_certificate: Option<BranchCertificate>,
    pub wall_time: f64,
    pub seed: u64,
    pub method: Method,
    pub poly_kind: Option<String>,
    /// Gram-Schmidt variant: "mgs" or "mgs2" (with a full second sweep).
    pub gs_variant: &'static str,
}

impl ConvergenceReport {
    pub fn final_estimate(&self) -> f64 {
        self.checkpoints
            .last()
            .map(|c| c.est_rel_diff)
            .unwrap_or(f64::INFINITY)
    }

    pub fn final_true_err(&self) -> Option<f64> {
        self.checkpoints.last().and_then(|c| c.true_rel_err)
    }
}

/// Spectral-interval estimate from `steps` Lanczos iterations: the
/// extreme Ritz values padded by their residual bounds
/// `h_next * |last eigenvector component|`, floored to stay positive.
/// An estimate, not a certificate: eigenvalues invisible to the start
/// vector may fall outside.
pub fn estimate_spectral_interval(
    op: &LinearOperator,
    start: &[Scalar],
    steps: usize,
) -> Result<(f64, f64)> {
    let dec = lanczos(op, start, steps, false)?;
    let (vals, vecs) = crate::linalg::symmetric_tridiag_eigen(&dec.diag, &dec.offdiag)?;
    let m = vals.len();
    let radius = |col: usize| dec.h_next * vecs.get(m - 1, col).norm();
    let lo_ritz = vals[0];
    let hi_ritz = vals[m - 1];
    let lo = (lo_ritz - radius(0))
        .max(0.25 * lo_ritz)
        .max(f64::MIN_POSITIVE);
    let hi = hi_ritz + radius(m - 1);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_invariant_enforced() {
        let ok = RunConfig::plain(10, 1e-10, 1);
        assert!(ok.validate().is_ok());
        assert_eq!(ok.effective_check_every(), 64);

        let mut bad = RunConfig::plain(10, 1e-10, 1);
        bad.d = 8;
        assert!(bad.validate().is_err());

        let pre = RunConfig::preconditioned(Method::LeftPrec, "chebyshev", 8, 100, 1e-10, 1);
        assert!(pre.validate().is_ok());
        assert_eq!(pre.effective_check_every(), 8);

        let mut no_poly = pre.clone();
        no_poly.poly_kind = None;
        assert!(no_poly.validate().is_err());

        let mut unknown = pre;
        unknown.poly_kind = Some("mystery".into());
        assert!(unknown.validate().is_err());
    }

    #[test]
    fn check_every_floor() {
        let mut cfg = RunConfig::preconditioned(Method::LeftPrec, "chebyshev", 128, 10, 1e-8, 0);
        assert_eq!(cfg.effective_check_every(), 1);
        cfg.check_every = Some(5);
        assert_eq!(cfg.effective_check_every(), 5);
    }

    #[test]
    fn interval_estimate_tracks_laplacian_spectrum() {
        use crate::operators::{make_laplace, rng::random_unit_vector, LaplaceFamily};
        let a = make_laplace(LaplaceFamily::D1, 80);
        let op = LinearOperator::plain(std::sync::Arc::new(a));
        let start = random_unit_vector(80, 5);
        let (lo, hi) = estimate_spectral_interval(&op, &start, 30).unwrap();
        let (tru_lo, tru_hi) = crate::operators::laplace_extreme_eigenvalues(LaplaceFamily::D1, 80);
        assert!(lo > 0.0);
        // The top of the spectrum converges quickly; the bottom is an
        // estimate within a modest factor.
        assert!(hi >= tru_hi - 1e-6, "hi {hi} vs true {tru_hi}");
        assert!(hi <= tru_hi * 1.1);
        assert!(lo <= tru_lo * 2.0, "lo {lo} vs true {tru_lo}");
    }
}
