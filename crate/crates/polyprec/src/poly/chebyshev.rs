//! Truncated Chebyshev expansion of `z^{-1/2}` on a positive interval,
//! with scalar and matrix-argument (Clenshaw) evaluation.

use super::PrecondPoly;
use crate::error::{Error, Result};
use crate::operators::LinearOperator;
use crate::Scalar;
use num_complex::Complex64;
use std::io::Write;

/// Chebyshev series `sum c_i T_i^{[a,b]}(z)` with real coefficients on a
/// positive interval `[a, b]`.
#[derive(Debug, Clone)]
pub struct ChebyshevPoly {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl ChebyshevPoly {
    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Wraps explicit coefficients (used for constant polynomials and in
    /// tests). The interval must still be positive.
    pub fn from_coeffs(a: f64, b: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !(0.0 < a && a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval { a, b });
        }
        assert!(!coeffs.is_empty());
        Ok(ChebyshevPoly { a, b, coeffs })
    }

    /// Affine map of `z` onto the reference interval `[-1, 1]`.
    fn map(&self, z: Scalar) -> Scalar {
        (2.0 * z - Complex64::new(self.a + self.b, 0.0)) / (self.b - self.a)
    }
}

/// Coefficients of the truncated Chebyshev series of `z^{-1/2}` on
/// `[a, b]`, by Chebyshev-Gauss quadrature with `m` nodes.
fn quadrature_coeffs(a: f64, b: f64, degree: usize, m: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fvals: Vec<f64> = (0..m)
        .map(|k| {
            let theta = std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
            let z = mid + half * theta.cos();
            1.0 / z.sqrt()
        })
        .collect();
    (0..=degree)
        .map(|i| {
            let mut acc = 0.0;
            for (k, f) in fvals.iter().enumerate() {
                let theta = std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
                acc += f * (i as f64 * theta).cos();
            }
            let weight = if i == 0 { 1.0 } else { 2.0 };
            weight * acc / m as f64
        })
        .collect()
}

/// Builds the degree-`degree` Chebyshev approximation to `z^{-1/2}` on
/// `[a, b]`: the coefficient integrals are evaluated by Chebyshev-Gauss
/// quadrature with `degree + 1` nodes, so the polynomial interpolates
/// `z^{-1/2}` at the Chebyshev points of the interval.
pub fn chebyshev_invsqrt(a: f64, b: f64, degree: usize) -> Result<ChebyshevPoly> {
    if !(0.0 < a && a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInterval { a, b });
    }
    let coeffs = quadrature_coeffs(a, b, degree, degree + 1);
    Ok(ChebyshevPoly { a, b, coeffs })
}

/// Variant of [`chebyshev_invsqrt`] with fully converged coefficient
/// integrals: the quadrature starts at `max(4 (degree+1), 128)` nodes and
/// doubles until two consecutive node counts agree to `1e-13` in every
/// coefficient. This is the truncated series proper; its uniform error on
/// the interval is somewhat smaller than the interpolant's.
pub fn chebyshev_invsqrt_integrated(a: f64, b: f64, degree: usize) -> Result<ChebyshevPoly> {
    if !(0.0 < a && a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInterval { a, b });
    }
    let mut m = (4 * (degree + 1)).max(128);
    let mut coeffs = quadrature_coeffs(a, b, degree, m);
    loop {
        let refined = quadrature_coeffs(a, b, degree, 2 * m);
        let scale = refined.iter().fold(0.0_f64, |acc, c| acc.max(c.abs()));
        let diff = coeffs
            .iter()
            .zip(refined.iter())
            .fold(0.0_f64, |acc, (c, r)| acc.max((c - r).abs()));
        coeffs = refined;
        m *= 2;
        if diff <= 1e-13 * scale.max(1.0) {
            break;
        }
        if m > (1 << 22) {
            return Err(Error::NonConvergence(format!(
                "Chebyshev quadrature did not settle below 1e-13 by M = {m}"
            )));
        }
    }
    Ok(ChebyshevPoly { a, b, coeffs })
}

impl PrecondPoly for ChebyshevPoly {
    fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn kind_name(&self) -> &'static str {
        "chebyshev"
    }

    /// Scalar Clenshaw evaluation.
    fn eval(&self, z: Scalar) -> Scalar {
        let x = self.map(z);
        let k = self.coeffs.len() - 1;
        if k == 0 {
            return Complex64::new(self.coeffs[0], 0.0);
        }
        let two_x = 2.0 * x;
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for i in (1..=k).rev() {
            let t = two_x * b1 - b2 + Complex64::new(self.coeffs[i], 0.0);
            b2 = b1;
            b1 = t;
        }
        x * b1 - b2 + Complex64::new(self.coeffs[0], 0.0)
    }

    /// Matrix-vector Clenshaw recurrence on the affinely mapped operator;
    /// exactly `degree` applications of `a`.
    fn apply(&self, a: &LinearOperator, v: &[Scalar]) -> Result<Vec<Scalar>> {
        let k = self.coeffs.len() - 1;
        let c0 = Complex64::new(self.coeffs[0], 0.0);
        if k == 0 {
            return Ok(v.iter().map(|x| c0 * x).collect());
        }
        let scale = 2.0 / (self.b - self.a);
        let shift = (self.a + self.b) / (self.b - self.a);
        let mapped = |x: &[Scalar]| -> Result<Vec<Scalar>> {
            let mut y = a.apply(x)?;
            for (yi, xi) in y.iter_mut().zip(x.iter()) {
                *yi = scale * *yi - shift * xi;
            }
            Ok(y)
        };

        // u_k = c_k v; then u_i = 2 map(u_{i+1}) - u_{i+2} + c_i v.
        let ck = Complex64::new(self.coeffs[k], 0.0);
        let mut u1: Vec<Scalar> = v.iter().map(|x| ck * x).collect();
        let mut u2 = vec![Complex64::new(0.0, 0.0); v.len()];
        for i in (1..k).rev() {
            let mut t = mapped(&u1)?;
            for x in t.iter_mut() {
                *x *= 2.0;
            }
            let ci = Complex64::new(self.coeffs[i], 0.0);
            for (tj, (u2j, vj)) in t.iter_mut().zip(u2.iter().zip(v.iter())) {
                *tj = *tj - u2j + ci * vj;
            }
            u2 = std::mem::replace(&mut u1, t);
        }
        let mut out = mapped(&u1)?;
        for (oj, (u2j, vj)) in out.iter_mut().zip(u2.iter().zip(v.iter())) {
            *oj = *oj - u2j + c0 * vj;
        }
        Ok(out)
    }

    /// 1000 equispaced points on `[a, b]`.
    fn certification_sample(&self) -> Vec<Scalar> {
        let n = 1000;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                Complex64::new(self.a + t * (self.b - self.a), 0.0)
            })
            .collect()
    }

    fn write_text(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "polyprec poly v1")?;
        writeln!(w, "kind chebyshev")?;
        writeln!(w, "interval {:.16e} {:.16e}", self.a, self.b)?;
        writeln!(w, "coeffs {}", self.coeffs.len())?;
        for c in &self.coeffs {
            writeln!(w, "{c:.16e}")?;
        }
        Ok(())
    }
}

/// Largest relative error `|1 - sqrt(z) q(z)|` of any polynomial against
/// `z^{-1/2}` over an equispaced grid on `[a, b]`.
pub fn sup_relative_invsqrt_error(q: &dyn PrecondPoly, a: f64, b: f64, npoints: usize) -> f64 {
    let mut sup: f64 = 0.0;
    for i in 0..npoints {
        let t = i as f64 / (npoints - 1) as f64;
        let z = a + t * (b - a);
        let qz = q.eval(Complex64::new(z, 0.0));
        let err = (Complex64::new(1.0, 0.0) - Complex64::new(z.sqrt(), 0.0) * qz).norm();
        sup = sup.max(err);
    }
    sup
}
