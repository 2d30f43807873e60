//! Interpolation of `z^{-1/2}` at (harmonic) Ritz values: Newton form on
//! Leja-ordered nodes, evaluated with a Horner-type scheme.

use super::PrecondPoly;
use crate::error::{Error, Result};
use crate::krylov::RitzSet;
use crate::linalg::{inv_sqrt, on_branch_cut};
use crate::operators::LinearOperator;
use crate::Scalar;
use std::io::Write;

/// Newton-form interpolant on Leja-ordered nodes.
#[derive(Debug, Clone)]
pub struct NewtonPoly {
    nodes: Vec<Scalar>,
    divided_diffs: Vec<Scalar>,
}

impl NewtonPoly {
    pub fn nodes(&self) -> &[Scalar] {
        &self.nodes
    }

    pub fn divided_diffs(&self) -> &[Scalar] {
        &self.divided_diffs
    }

    pub(crate) fn from_parts(nodes: Vec<Scalar>, divided_diffs: Vec<Scalar>) -> Self {
        assert_eq!(nodes.len(), divided_diffs.len());
        NewtonPoly {
            nodes,
            divided_diffs,
        }
    }
}

/// Leja ordering: start from the node of maximum modulus, then greedily
/// maximize the product of distances to the already chosen nodes. The
/// products are compared as log-sums to avoid overflow; ties fall to the
/// candidate with the smaller index after sorting by (Re, Im).
fn leja_order(values: &[Scalar]) -> Vec<Scalar> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|x, y| (x.re, x.im).partial_cmp(&(y.re, y.im)).unwrap());

    let n = sorted.len();
    let mut chosen: Vec<Scalar> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    // log-sum of distances from each candidate to all chosen nodes
    let mut logsum = vec![0.0_f64; n];

    // First node: maximum modulus.
    let mut first = 0;
    for (i, z) in sorted.iter().enumerate() {
        if z.norm() > sorted[first].norm() {
            first = i;
        }
    }
    used[first] = true;
    chosen.push(sorted[first]);

    for _ in 1..n {
        let last = *chosen.last().unwrap();
        let mut best: Option<usize> = None;
        for i in 0..n {
            if used[i] {
                continue;
            }
            let d = (sorted[i] - last).norm();
            logsum[i] += if d > 0.0 { d.ln() } else { f64::NEG_INFINITY };
            if best.is_none() || logsum[i] > logsum[best.unwrap()] {
                best = Some(i);
            }
        }
        let pick = best.unwrap();
        used[pick] = true;
        chosen.push(sorted[pick]);
    }
    chosen
}

/// Divided differences of `z^{-1/2}` on the ordered nodes.
fn divided_differences(nodes: &[Scalar]) -> Vec<Scalar> {
    let n = nodes.len();
    let mut dd: Vec<Scalar> = nodes.iter().map(|&z| inv_sqrt(z)).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - level]);
        }
    }
    dd
}

/// Builds the degree `d-1` polynomial interpolating `z^{-1/2}` at the `d`
/// Ritz values.
pub fn ritz_interp_poly(ritz: &RitzSet) -> Result<NewtonPoly> {
    let values = &ritz.values;
    assert!(!values.is_empty());
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);

    for &z in values {
        if on_branch_cut(z, 1e-13 * scale) {
            return Err(Error::BranchCutNode { re: z.re, im: z.im });
        }
    }
    if values.len() > 1 {
        let mut min_dist = f64::MAX;
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                min_dist = min_dist.min((values[i] - values[j]).norm());
            }
        }
        if min_dist < 1e-12 * scale {
            return Err(Error::NearCoincidentNodes(min_dist));
        }
    }

    let nodes = leja_order(values);
    let divided_diffs = divided_differences(&nodes);
    Ok(NewtonPoly {
        nodes,
        divided_diffs,
    })
}

impl PrecondPoly for NewtonPoly {
    fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    fn kind_name(&self) -> &'static str {
        "ritz_newton"
    }

    /// Horner-type nested evaluation of the Newton form.
    fn eval(&self, z: Scalar) -> Scalar {
        let k = self.nodes.len() - 1;
        let mut acc = self.divided_diffs[k];
        for j in (0..k).rev() {
            acc = acc * (z - self.nodes[j]) + self.divided_diffs[j];
        }
        acc
    }

    /// Nested evaluation at a matrix argument: exactly `degree`
    /// applications of `a`.
    fn apply(&self, a: &LinearOperator, v: &[Scalar]) -> Result<Vec<Scalar>> {
        let k = self.nodes.len() - 1;
        let mut w: Vec<Scalar> = v.iter().map(|x| self.divided_diffs[k] * x).collect();
        for j in (0..k).rev() {
            let aw = a.apply(&w)?;
            let node = self.nodes[j];
            let dd = self.divided_diffs[j];
            for ((wi, ai), vi) in w.iter_mut().zip(aw.iter()).zip(v.iter()) {
                *wi = ai - node * *wi + dd * vi;
            }
        }
        Ok(w)
    }

    /// The interpolation nodes themselves.
    fn certification_sample(&self) -> Vec<Scalar> {
        self.nodes.clone()
    }

    fn write_text(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "polyprec poly v1")?;
        writeln!(w, "kind ritz_newton")?;
        writeln!(w, "nodes {}", self.nodes.len())?;
        for z in &self.nodes {
            writeln!(w, "{:.16e} {:.16e}", z.re, z.im)?;
        }
        writeln!(w, "diffs {}", self.divided_diffs.len())?;
        for z in &self.divided_diffs {
            writeln!(w, "{:.16e} {:.16e}", z.re, z.im)?;
        }
        Ok(())
    }
}
