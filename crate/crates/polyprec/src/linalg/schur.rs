//! Complex Schur decomposition via single-shift Hessenberg QR with
//! Wilkinson shifts. General matrices are first reduced to Hessenberg
//! form by Householder similarity transforms.

use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::Scalar;
use num_complex::Complex64;

/// Unitary `Q` and upper triangular `T` with `A = Q T Q^*`.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub q: DenseMatrix,
    pub t: DenseMatrix,
}

impl SchurForm {
    pub fn size(&self) -> usize {
        self.t.rows()
    }

    /// Eigenvalues of the decomposed matrix, in diagonal order of `T`.
    pub fn eigenvalues(&self) -> Vec<Scalar> {
        self.t.diag()
    }
}

/// Deflation threshold relative to the two neighboring diagonal entries.
const DEFLATION_REL: f64 = 1e-13;
/// Sweep budget per eigenvalue before giving up.
const MAX_SWEEPS_PER_EIG: usize = 30;

/// Complex Givens rotation `G = [[c, s], [-conj(s), c]]` with real `c >= 0`
/// such that `G [a; b] = [r; 0]`.
#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

fn givens(a: Complex64, b: Complex64) -> Givens {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return Givens {
            c: 1.0,
            s: Complex64::new(0.0, 0.0),
        };
    }
    if na == 0.0 {
        return Givens {
            c: 0.0,
            s: b.conj() / nb,
        };
    }
    let h = na.hypot(nb);
    let c = na / h;
    let s = (b.conj() * (a / na)) / h;
    Givens { c, s }
}

fn left_apply(g: Givens, t: &mut DenseMatrix, k: usize, col_lo: usize) {
    let n = t.cols();
    for j in col_lo..n {
        let x = t.get(k, j);
        let y = t.get(k + 1, j);
        t.set(k, j, g.c * x + g.s * y);
        t.set(k + 1, j, -g.s.conj() * x + g.c * y);
    }
}

fn right_apply(g: Givens, t: &mut DenseMatrix, k: usize, row_hi: usize) {
    for i in 0..row_hi {
        let x = t.get(i, k);
        let y = t.get(i, k + 1);
        t.set(i, k, g.c * x + g.s.conj() * y);
        t.set(i, k + 1, -g.s * x + g.c * y);
    }
}

/// Wilkinson shift: eigenvalue of the trailing 2x2 block closest to its
/// bottom-right entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let p = (a - d) * 0.5;
    let bc = b * c;
    let disc = (p * p + bc).sqrt();
    let plus = p + disc;
    let minus = p - disc;
    let denom = if plus.norm() >= minus.norm() {
        plus
    } else {
        minus
    };
    if denom.norm() == 0.0 {
        d
    } else {
        d - bc / denom
    }
}

/// Schur decomposition of an upper Hessenberg matrix.
///
/// Single-shift QR with deflation threshold
/// `1e-13 * (|t_ii| + |t_{i+1,i+1}|)` and an exceptional shift every tenth
/// sweep on a stuck eigenvalue. Fails with [`Error::NonConvergence`] after
/// `30 * n` sweeps on one eigenvalue.
pub fn hessenberg_schur(h: &DenseMatrix) -> Result<SchurForm> {
    assert_eq!(h.rows(), h.cols(), "hessenberg_schur needs a square matrix");
    assert!(
        h.is_upper_hessenberg(1e-12 * (1.0 + h.max_abs())),
        "hessenberg_schur needs an upper Hessenberg matrix"
    );
    qr_iteration(h.clone(), DenseMatrix::identity(h.rows()))
}

/// Schur decomposition of a general square matrix: Householder reduction
/// to Hessenberg form followed by the QR iteration.
pub fn schur(a: &DenseMatrix) -> Result<SchurForm> {
    assert_eq!(a.rows(), a.cols(), "schur needs a square matrix");
    let (h, u) = householder_hessenberg(a);
    qr_iteration(h, u)
}

fn qr_iteration(mut t: DenseMatrix, mut q: DenseMatrix) -> Result<SchurForm> {
    let n = t.rows();
    if n == 0 {
        return Ok(SchurForm { q, t });
    }
    // Hessenberg contract: make everything below the subdiagonal exactly zero.
    for i in 2..n {
        for j in 0..i - 1 {
            t.set(i, j, Complex64::new(0.0, 0.0));
        }
    }

    let mut hi = n - 1;
    let mut sweeps_here = 0usize;
    while hi > 0 {
        // Deflate negligible subdiagonals in the active range.
        for k in 0..hi {
            let thr = DEFLATION_REL * (t.get(k, k).norm() + t.get(k + 1, k + 1).norm());
            if t.get(k + 1, k).norm() <= thr {
                t.set(k + 1, k, Complex64::new(0.0, 0.0));
            }
        }
        if t.get(hi, hi - 1).norm() == 0.0 {
            hi -= 1;
            sweeps_here = 0;
            continue;
        }
        // Find the start of the unreduced block ending at hi.
        let mut lo = hi;
        while lo > 0 && t.get(lo, lo - 1).norm() != 0.0 {
            lo -= 1;
        }

        sweeps_here += 1;
        if sweeps_here > MAX_SWEEPS_PER_EIG * n {
            return Err(Error::NonConvergence(format!(
                "Hessenberg QR stalled at index {hi} after {sweeps_here} sweeps"
            )));
        }

        let mu = if sweeps_here % 10 == 0 {
            // Exceptional shift to break symmetric stalls.
            let extra = if hi >= 2 {
                t.get(hi - 1, hi - 2).norm()
            } else {
                0.0
            };
            Complex64::new(t.get(hi, hi - 1).norm() + extra, 0.0)
        } else {
            wilkinson_shift(
                t.get(hi - 1, hi - 1),
                t.get(hi - 1, hi),
                t.get(hi, hi - 1),
                t.get(hi, hi),
            )
        };

        // Explicit shifted QR sweep on the active block.
        for i in lo..=hi {
            let d = t.get(i, i);
            t.set(i, i, d - mu);
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let g = givens(t.get(k, k), t.get(k + 1, k));
            left_apply(g, &mut t, k, lo.saturating_sub(1));
            t.set(k + 1, k, Complex64::new(0.0, 0.0));
            rotations.push((k, g));
        }
        for &(k, g) in &rotations {
            let row_hi = (k + 2).min(n);
            right_apply(g, &mut t, k, row_hi);
            right_apply(g, &mut q, k, n);
        }
        for i in lo..=hi {
            let d = t.get(i, i);
            t.set(i, i, d + mu);
        }
    }

    // Final cleanup: T is upper triangular by construction of the deflations.
    for i in 1..n {
        for j in 0..i {
            t.set(i, j, Complex64::new(0.0, 0.0));
        }
    }
    Ok(SchurForm { q, t })
}

/// Householder reduction `A = U H U^*` with `H` upper Hessenberg.
fn householder_hessenberg(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut u = DenseMatrix::identity(n);
    if n < 3 {
        return (h, u);
    }
    for k in 0..n - 2 {
        // Householder vector annihilating h[k+2.., k].
        let m = n - k - 1;
        let mut v: Vec<Complex64> = (0..m).map(|i| h.get(k + 1 + i, k)).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            v[0] / v[0].norm()
        };
        v[0] += phase * xnorm;
        let vnorm_sqr = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vnorm_sqr == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sqr;

        // H <- P H, rows k+1..n.
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..m {
                acc += v[i].conj() * h.get(k + 1 + i, j);
            }
            acc *= tau;
            for i in 0..m {
                let cur = h.get(k + 1 + i, j);
                h.set(k + 1 + i, j, cur - acc * v[i]);
            }
        }
        // H <- H P, cols k+1..n.
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                acc += h.get(i, k + 1 + j) * v[j];
            }
            acc *= tau;
            for j in 0..m {
                let cur = h.get(i, k + 1 + j);
                h.set(i, k + 1 + j, cur - acc * v[j].conj());
            }
        }
        // U <- U P.
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                acc += u.get(i, k + 1 + j) * v[j];
            }
            acc *= tau;
            for j in 0..m {
                let cur = u.get(i, k + 1 + j);
                u.set(i, k + 1 + j, cur - acc * v[j].conj());
            }
        }
        // Enforce exact zeros below the subdiagonal in column k.
        for i in k + 2..n {
            h.set(i, k, Complex64::new(0.0, 0.0));
        }
    }
    (h, u)
}
