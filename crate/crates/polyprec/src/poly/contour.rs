//! Least-squares polynomial approximation of `z^{-1/2}` on a discretized
//! contour enclosing the Ritz values. The orthonormal polynomial basis is
//! built implicitly by an Arnoldi process on the node-diagonal matrix; the
//! matrix-argument evaluation replays the stored Hessenberg recurrence and
//! needs no inner products.

use super::PrecondPoly;
use crate::error::{Error, Result};
use crate::krylov::{arnoldi, RitzSet};
use crate::linalg::{dot, inv_sqrt, on_branch_cut, DenseMatrix};
use crate::operators::LinearOperator;
use crate::Scalar;
use num_complex::Complex64;
use std::io::Write;

/// LS polynomial in the contour-orthonormal basis: discretization nodes,
/// the small `(d+1) x d` Hessenberg recurrence and the coefficient vector.
#[derive(Debug, Clone)]
pub struct ContourLSPoly {
    nodes: Vec<Scalar>,
    h_small: DenseMatrix,
    alpha: Vec<Scalar>,
}

impl ContourLSPoly {
    pub fn nodes(&self) -> &[Scalar] {
        &self.nodes
    }

    pub fn alpha(&self) -> &[Scalar] {
        &self.alpha
    }

    pub fn h_small(&self) -> &DenseMatrix {
        &self.h_small
    }

    pub(crate) fn from_parts(nodes: Vec<Scalar>, h_small: DenseMatrix, alpha: Vec<Scalar>) -> Self {
        ContourLSPoly {
            nodes,
            h_small,
            alpha,
        }
    }

    /// The omega-norm residual `|| vec(z^{-1/2}) - vec(q) ||` of this
    /// polynomial over its own nodes.
    pub fn omega_residual(&self) -> f64 {
        let mut acc = 0.0;
        for &z in &self.nodes {
            let d = inv_sqrt(z) - self.eval(z);
            acc += d.norm_sqr();
        }
        acc.sqrt()
    }
}

/// Convex hull by Andrew's monotone chain; returns the hull vertices in
/// counterclockwise order.
fn convex_hull(points: &[Scalar]) -> Vec<Scalar> {
    let mut pts: Vec<Scalar> = points.to_vec();
    pts.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    pts.dedup_by(|a, b| a.re == b.re && a.im == b.im);
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let cross = |o: Scalar, a: Scalar, b: Scalar| -> f64 {
        (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
    };
    let mut hull: Vec<Scalar> = Vec::with_capacity(2 * n);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Builds the LS preconditioning polynomial of the given degree from a set
/// of Ritz values.
///
/// The boundary polygon is the convex hull of the Ritz values; collinear
/// (for instance purely real) Ritz sets are first inflated into a thin box
/// so the hull is two-dimensional. The polygon is discretized with uniform
/// arclength `step`, and any node closer to the origin than `min_abs` is
/// projected radially onto the circle of that radius.
pub fn contour_ls_poly(
    ritz: &RitzSet,
    degree: usize,
    min_abs: f64,
    step: f64,
) -> Result<ContourLSPoly> {
    assert!(step > 0.0, "contour step must be positive");
    let points = &ritz.values;
    if points.is_empty() {
        return Err(Error::DegenerateContour);
    }
    let max_abs = points.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let span = {
        let mut s = 0.0_f64;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                s = s.max((points[i] - points[j]).norm());
            }
        }
        s
    };

    let mut hull = convex_hull(points);
    if hull.len() < 3 {
        // Collinear or single-point Ritz set: inflate into a box.
        let h = (0.01 * span).max(0.5 * min_abs).max(1e-3 * max_abs);
        if h == 0.0 {
            return Err(Error::DegenerateContour);
        }
        let mut inflated = Vec::with_capacity(4 * points.len());
        for &p in points.iter() {
            inflated.push(p + Complex64::new(h, 0.0));
            inflated.push(p - Complex64::new(h, 0.0));
            inflated.push(p + Complex64::new(0.0, h));
            inflated.push(p - Complex64::new(0.0, h));
        }
        hull = convex_hull(&inflated);
        if hull.len() < 3 {
            return Err(Error::DegenerateContour);
        }
    }

    // Uniform-arclength discretization of the closed polygon.
    let k = hull.len();
    let mut edge_len = Vec::with_capacity(k);
    let mut perimeter = 0.0;
    for i in 0..k {
        let l = (hull[(i + 1) % k] - hull[i]).norm();
        edge_len.push(l);
        perimeter += l;
    }
    let n_nodes = ((perimeter / step).ceil() as usize).max(degree + 2);
    let ds = perimeter / n_nodes as f64;
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut edge = 0usize;
    let mut offset = 0.0_f64;
    for t in 0..n_nodes {
        let mut s = t as f64 * ds - offset;
        while s >= edge_len[edge] && edge + 1 < k {
            s -= edge_len[edge];
            offset += edge_len[edge];
            edge += 1;
        }
        let frac = if edge_len[edge] > 0.0 {
            s / edge_len[edge]
        } else {
            0.0
        };
        let z = hull[edge] + (hull[(edge + 1) % k] - hull[edge]) * frac;
        nodes.push(z);
    }

    // Minimum-modulus clamp: radial projection onto |z| = min_abs.
    if min_abs > 0.0 {
        for z in nodes.iter_mut() {
            let r = z.norm();
            if r < min_abs {
                *z = if r == 0.0 {
                    Complex64::new(min_abs, 0.0)
                } else {
                    *z * (min_abs / r)
                };
            }
        }
    }

    let cut_tol = 1e-13 * max_abs.max(1.0);
    for &z in &nodes {
        if on_branch_cut(z, cut_tol) {
            return Err(Error::NodeOnBranchCut { re: z.re, im: z.im });
        }
    }

    build_from_nodes(nodes, degree)
}

/// Runs the small Arnoldi process on `diag(z_1..z_N)` with start
/// `(1,..,1)/sqrt(N)` and assembles the LS coefficients
/// `alpha = P_d^* vec(z^{-1/2})`.
fn build_from_nodes(nodes: Vec<Scalar>, degree: usize) -> Result<ContourLSPoly> {
    let n = nodes.len();
    let d = degree + 1;
    assert!(d < n, "need degree + 1 < number of contour nodes");

    let op = LinearOperator::node_diag(nodes.clone());
    let s = (n as f64).sqrt().recip();
    let start = vec![Complex64::new(s, 0.0); n];
    let dec = arnoldi(&op, &start, d, true)?;
    let steps = dec.steps();
    // Breakdown before d steps means the nodes support fewer basis
    // polynomials; truncate to what the discretization can represent.
    let d_eff = steps;

    let mut h_small = DenseMatrix::zeros(d_eff + 1, d_eff);
    for i in 0..d_eff {
        for j in 0..d_eff {
            h_small.set(i, j, dec.h.get(i, j));
        }
    }
    h_small.set(d_eff, d_eff - 1, Complex64::new(dec.h_next, 0.0));

    let f_vec: Vec<Scalar> = nodes.iter().map(|&z| inv_sqrt(z)).collect();
    let alpha: Vec<Scalar> = dec.basis.iter().map(|p| dot(p, &f_vec)).collect();

    Ok(ContourLSPoly {
        nodes,
        h_small,
        alpha,
    })
}

impl ContourLSPoly {
    /// Scalar replay of the basis recurrence.
    fn basis_values(&self, z: Scalar) -> Vec<Scalar> {
        let d = self.alpha.len();
        let n = self.nodes.len() as f64;
        let mut w = Vec::with_capacity(d);
        w.push(Complex64::new(n.sqrt().recip(), 0.0));
        for k in 1..d {
            let mut t = z * w[k - 1];
            for (i, wi) in w.iter().enumerate() {
                t -= self.h_small.get(i, k - 1) * wi;
            }
            w.push(t / self.h_small.get(k, k - 1));
        }
        w
    }
}

impl PrecondPoly for ContourLSPoly {
    fn degree(&self) -> usize {
        self.alpha.len() - 1
    }

    fn kind_name(&self) -> &'static str {
        "contour_ls"
    }

    fn eval(&self, z: Scalar) -> Scalar {
        let w = self.basis_values(z);
        self.alpha.iter().zip(w.iter()).map(|(a, b)| a * b).sum()
    }

    /// Replays the stored recurrence at the matrix argument: `degree` mvms
    /// and no inner products.
    fn apply(&self, a: &LinearOperator, v: &[Scalar]) -> Result<Vec<Scalar>> {
        let d = self.alpha.len();
        let s = (self.nodes.len() as f64).sqrt().recip();
        let mut basis: Vec<Vec<Scalar>> = Vec::with_capacity(d);
        basis.push(v.iter().map(|x| s * x).collect());
        let mut out: Vec<Scalar> = basis[0].iter().map(|x| self.alpha[0] * x).collect();
        for k in 1..d {
            let mut t = a.apply(&basis[k - 1])?;
            for (i, w) in basis.iter().enumerate() {
                let hik = self.h_small.get(i, k - 1);
                for (tj, wj) in t.iter_mut().zip(w.iter()) {
                    *tj -= hik * wj;
                }
            }
            let denom = self.h_small.get(k, k - 1);
            if denom.norm() < 1e-14 {
                return Err(Error::RecurrenceBreakdown(denom.norm()));
            }
            for tj in t.iter_mut() {
                *tj /= denom;
            }
            for (oj, tj) in out.iter_mut().zip(t.iter()) {
                *oj += self.alpha[k] * tj;
            }
            basis.push(t);
        }
        Ok(out)
    }

    /// All discretization nodes.
    fn certification_sample(&self) -> Vec<Scalar> {
        self.nodes.clone()
    }

    fn write_text(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "polyprec poly v1")?;
        writeln!(w, "kind contour_ls")?;
        writeln!(w, "nodes {}", self.nodes.len())?;
        for z in &self.nodes {
            writeln!(w, "{:.16e} {:.16e}", z.re, z.im)?;
        }
        let (rows, cols) = (self.h_small.rows(), self.h_small.cols());
        writeln!(w, "hsmall {rows} {cols}")?;
        for i in 0..rows {
            for j in 0..cols {
                let z = self.h_small.get(i, j);
                writeln!(w, "{:.16e} {:.16e}", z.re, z.im)?;
            }
        }
        writeln!(w, "alpha {}", self.alpha.len())?;
        for z in &self.alpha {
            writeln!(w, "{:.16e} {:.16e}", z.re, z.im)?;
        }
        Ok(())
    }
}
