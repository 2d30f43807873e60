//! Condition-number analysis of the preconditioned matrix `A q(A)^2` for
//! Hermitian positive definite `A`: the uniform relative approximation
//! error epsilon, the `(1 + 2 eps + eps^2) / (1 - 2 eps - eps^2)` bound
//! (valid for `eps < sqrt(2) - 1`), and the actual condition number when
//! the spectrum is available.

use crate::error::{Error, Result};
use crate::linalg::real_sym_eigen;
use crate::operators::{rng::random_unit_vector, LinearOperator, SparseMatrix};
use crate::poly::{sup_relative_invsqrt_error, PrecondPoly};
use num_complex::Complex64;
use std::sync::Arc;

const SQRT2_MINUS_1: f64 = std::f64::consts::SQRT_2 - 1.0;
const EPSILON_GRID: usize = 10_000;

/// Outcome of the preconditioning condition analysis.
#[derive(Debug, Clone)]
pub struct ConditionEstimate {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Condition number of `A` itself.
    pub kappa_a: f64,
    /// Uniform relative polynomial error over `[lambda_min, lambda_max]`
    /// (sup of `|1 - sqrt(z) q(z)|` on a 10000-point grid).
    pub epsilon: f64,
    /// The bound is inapplicable when `epsilon >= sqrt(2) - 1`.
    pub epsilon_too_large: bool,
    pub kappa_pre_bound: Option<f64>,
    /// Actual condition number of `A q(A)^2` (eigenvalue mapping
    /// `lambda -> lambda q(lambda)^2`), present when the spectrum is known.
    pub kappa_pre_actual: Option<f64>,
}

/// Analysis from a known (closed-form or densely computed) spectrum.
pub fn condition_analysis_spectrum(spectrum: &[f64], q: &dyn PrecondPoly) -> ConditionEstimate {
    assert!(!spectrum.is_empty());
    let lambda_min = spectrum.iter().copied().fold(f64::MAX, f64::min);
    let lambda_max = spectrum.iter().copied().fold(f64::MIN, f64::max);
    let mut est = interval_analysis(lambda_min, lambda_max, q);

    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for &lam in spectrum {
        let qv = q.eval(Complex64::new(lam, 0.0));
        let mapped = lam * qv.norm_sqr();
        lo = lo.min(mapped);
        hi = hi.max(mapped);
    }
    est.kappa_pre_actual = Some(hi / lo);
    est
}

fn interval_analysis(lambda_min: f64, lambda_max: f64, q: &dyn PrecondPoly) -> ConditionEstimate {
    let epsilon = sup_relative_invsqrt_error(q, lambda_min, lambda_max, EPSILON_GRID);
    let epsilon_too_large = epsilon >= SQRT2_MINUS_1;
    let kappa_pre_bound = if epsilon_too_large {
        None
    } else {
        Some((1.0 + 2.0 * epsilon + epsilon * epsilon) / (1.0 - 2.0 * epsilon - epsilon * epsilon))
    };
    ConditionEstimate {
        lambda_min,
        lambda_max,
        kappa_a: lambda_max / lambda_min,
        epsilon,
        epsilon_too_large,
        kappa_pre_bound,
        kappa_pre_actual: None,
    }
}

/// Analysis from the matrix itself: the spectrum is computed densely for
/// `n <= dense_limit` (Hermitian path), otherwise the extreme eigenvalues
/// are estimated by a short Lanczos run and no actual condition number is
/// reported.
pub fn condition_analysis(
    a: &SparseMatrix,
    q: &dyn PrecondPoly,
    dense_limit: usize,
    seed: u64,
) -> Result<ConditionEstimate> {
    if a.hermitian_deviation() > 1e-12 * a.max_abs().max(1.0) {
        return Err(Error::Config(
            "condition analysis applies to Hermitian positive definite matrices".into(),
        ));
    }
    if a.dim() <= dense_limit {
        let (vals, _) = real_sym_eigen(&a.to_dense())?;
        Ok(condition_analysis_spectrum(&vals, q))
    } else {
        let op = LinearOperator::plain(Arc::new(a.clone()));
        let start = random_unit_vector(a.dim(), seed);
        let steps = 40.min(a.dim());
        let (lo, hi) = super::estimate_spectral_interval(&op, &start, steps)?;
        Ok(interval_analysis(lo, hi, q))
    }
}
