//! Preconditioning polynomials `q(z) ~ z^{-1/2}` in three interchangeable
//! representations, each behind the [`PrecondPoly`] trait and registered
//! by name for runtime selection, plus branch-safety certification and a
//! plain-text serialization format.

mod chebyshev;
mod contour;
mod newton;
mod serialize;

pub use chebyshev::{
    chebyshev_invsqrt, chebyshev_invsqrt_integrated, sup_relative_invsqrt_error, ChebyshevPoly,
};
pub use contour::{contour_ls_poly, ContourLSPoly};
pub use newton::{ritz_interp_poly, NewtonPoly};
pub use serialize::{read_poly_file, write_poly_file};

use crate::error::{Error, Result};
use crate::krylov::{arnoldi, ritz_values, RitzKind};
use crate::linalg::inv_sqrt;
use crate::operators::LinearOperator;
use crate::Scalar;
use std::io::Write;
use std::sync::Arc;

/// A preconditioning polynomial: scalar evaluation, matrix-argument
/// application (exactly `degree` operator applications), and enough
/// metadata to certify and serialize it.
pub trait PrecondPoly: Send + Sync {
    fn degree(&self) -> usize;

    /// Strategy name as registered (`chebyshev`, `ritz_newton`,
    /// `contour_ls`).
    fn kind_name(&self) -> &'static str;

    /// Pointwise evaluation of `q(z)`.
    fn eval(&self, z: Scalar) -> Scalar;

    /// `q(A) v` using exactly `degree` applications of `a`.
    fn apply(&self, a: &LinearOperator, v: &[Scalar]) -> Result<Vec<Scalar>>;

    /// Default point set for branch certification: an interval grid for
    /// Chebyshev, the interpolation nodes for Newton, all discretization
    /// nodes for contour LS.
    fn certification_sample(&self) -> Vec<Scalar>;

    fn write_text(&self, w: &mut dyn Write) -> std::io::Result<()>;
}

/// Outcome of sampling `Re q(z)` over a point set.
#[derive(Debug, Clone)]
pub struct BranchCertificate {
    pub checked_points: Vec<Scalar>,
    pub min_real_part: f64,
    /// All sampled values have positive real part, so
    /// `((q(A))^2)^{1/2} = q(A)` holds wherever the sample represents the
    /// spectrum.
    pub satisfied: bool,
    /// Whether `|q(z) - z^{-1/2}| <= |z^{-1/2}| / sqrt(2)` held on every
    /// sample point (the sufficient condition for branch safety).
    pub sqrt2_condition: bool,
}

/// Evaluates `q` on the sample and reports whether all values stay in the
/// open right half-plane, together with the `1/sqrt(2)` relative-accuracy
/// condition.
pub fn certify_branch(q: &dyn PrecondPoly, sample: &[Scalar]) -> BranchCertificate {
    assert!(!sample.is_empty(), "certification sample must be nonempty");
    let mut min_real = f64::INFINITY;
    let mut sqrt2 = true;
    for &z in sample {
        let v = q.eval(z);
        min_real = min_real.min(v.re);
        let target = inv_sqrt(z);
        if (v - target).norm() > std::f64::consts::FRAC_1_SQRT_2 * target.norm() {
            sqrt2 = false;
        }
    }
    BranchCertificate {
        checked_points: sample.to_vec(),
        min_real_part: min_real,
        satisfied: min_real > 0.0,
        sqrt2_condition: sqrt2,
    }
}

/// Certifies on the polynomial's own default sample.
pub fn certify_default(q: &dyn PrecondPoly) -> BranchCertificate {
    certify_branch(q, &q.certification_sample())
}

/// Everything a polynomial strategy may need at construction time.
pub struct PolyBuildContext<'a> {
    /// Operator the polynomial will precondition (Ritz values are
    /// harvested from it; mvms spent here are counted on its counters).
    pub op: &'a LinearOperator,
    /// Start vector for Ritz harvesting.
    pub start: &'a [Scalar],
    /// `d`: polynomial degree + 1.
    pub d: usize,
    /// Positive spectral interval, required by the Chebyshev strategy.
    pub interval: Option<(f64, f64)>,
    /// Interpolate at harmonic instead of standard Ritz values.
    pub harmonic: bool,
    /// Reorthogonalize the harvesting Arnoldi process.
    pub reorth: bool,
    /// Minimum contour modulus (portion closer to 0 is replaced by a
    /// circular arc of this radius).
    pub contour_min_abs: f64,
    /// Uniform arclength discretization step of the contour.
    pub contour_step: f64,
    /// Arnoldi steps used to harvest Ritz values for the contour.
    pub contour_ritz_dim: usize,
}

impl<'a> PolyBuildContext<'a> {
    pub fn new(op: &'a LinearOperator, start: &'a [Scalar], d: usize) -> Self {
        PolyBuildContext {
            op,
            start,
            d,
            interval: None,
            harmonic: false,
            reorth: false,
            contour_min_abs: 0.1,
            contour_step: 0.005,
            contour_ritz_dim: 0,
        }
    }
}

/// A named polynomial-construction strategy.
pub struct PolyStrategy {
    pub name: &'static str,
    pub build: fn(&PolyBuildContext<'_>) -> Result<Arc<dyn PrecondPoly>>,
}

fn build_chebyshev(ctx: &PolyBuildContext<'_>) -> Result<Arc<dyn PrecondPoly>> {
    let (a, b) = ctx.interval.ok_or_else(|| {
        Error::Config("chebyshev polynomial requires a positive spectral interval".into())
    })?;
    Ok(Arc::new(chebyshev_invsqrt(a, b, ctx.d - 1)?))
}

fn build_ritz_newton(ctx: &PolyBuildContext<'_>) -> Result<Arc<dyn PrecondPoly>> {
    let dec = arnoldi(ctx.op, ctx.start, ctx.d, ctx.reorth)?;
    let kind = if ctx.harmonic {
        RitzKind::Harmonic
    } else {
        RitzKind::Standard
    };
    let ritz = ritz_values(&dec, kind)?;
    Ok(Arc::new(ritz_interp_poly(&ritz)?))
}

fn build_contour_ls(ctx: &PolyBuildContext<'_>) -> Result<Arc<dyn PrecondPoly>> {
    let dim = if ctx.contour_ritz_dim > 0 {
        ctx.contour_ritz_dim
    } else {
        (2 * ctx.d).max(16)
    };
    let dec = arnoldi(ctx.op, ctx.start, dim, ctx.reorth)?;
    let ritz = ritz_values(&dec, RitzKind::Standard)?;
    Ok(Arc::new(contour_ls_poly(
        &ritz,
        ctx.d - 1,
        ctx.contour_min_abs,
        ctx.contour_step,
    )?))
}

static REGISTRY: &[PolyStrategy] = &[
    PolyStrategy {
        name: "chebyshev",
        build: build_chebyshev,
    },
    PolyStrategy {
        name: "ritz_newton",
        build: build_ritz_newton,
    },
    PolyStrategy {
        name: "contour_ls",
        build: build_contour_ls,
    },
];

/// All registered polynomial strategies.
pub fn registry() -> &'static [PolyStrategy] {
    REGISTRY
}

/// Looks up a strategy by its registered name.
pub fn lookup(name: &str) -> Option<&'static PolyStrategy> {
    REGISTRY.iter().find(|s| s.name == name)
}

/// Builds a polynomial through the registry.
pub fn build_poly(name: &str, ctx: &PolyBuildContext<'_>) -> Result<Arc<dyn PrecondPoly>> {
    let strategy = lookup(name)
        .ok_or_else(|| Error::Config(format!("unknown polynomial strategy: {name}")))?;
    (strategy.build)(ctx)
}
