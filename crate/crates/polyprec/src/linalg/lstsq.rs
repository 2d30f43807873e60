//! Householder-QR least squares and a small partial-pivot LU solve.

use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::Scalar;
use num_complex::Complex64;

/// Minimizer of `||rhs - B x||_2` via Householder QR.
///
/// `B` must have at least as many rows as columns and full column rank;
/// a triangular pivot below `1e-13 ||B||_F` raises [`Error::RankDeficient`].
pub fn lstsq(b: &DenseMatrix, rhs: &[Scalar]) -> Result<Vec<Scalar>> {
    let m = b.rows();
    let n = b.cols();
    assert!(m >= n, "lstsq needs rows >= cols");
    if rhs.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: rhs.len(),
        });
    }
    let pivot_tol = 1e-13 * b.frobenius_norm();

    let mut r = b.clone();
    let mut y = rhs.to_vec();

    for k in 0..n {
        // Householder vector for column k, rows k..m.
        let len = m - k;
        let mut v: Vec<Complex64> = (0..len).map(|i| r.get(k + i, k)).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            return Err(Error::RankDeficient(0.0));
        }
        let phase = if v[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            v[0] / v[0].norm()
        };
        v[0] += phase * xnorm;
        let vnorm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm_sqr;

        // Apply P = I - tau v v^* to the remaining columns of R.
        for j in k..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..len {
                acc += v[i].conj() * r.get(k + i, j);
            }
            acc *= tau;
            for i in 0..len {
                let cur = r.get(k + i, j);
                r.set(k + i, j, cur - acc * v[i]);
            }
        }
        // Apply to the right-hand side.
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..len {
            acc += v[i].conj() * y[k + i];
        }
        acc *= tau;
        for i in 0..len {
            y[k + i] -= acc * v[i];
        }
    }

    // Back substitution on the leading n x n triangle.
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in i + 1..n {
            s -= r.get(i, j) * x[j];
        }
        let p = r.get(i, i);
        if p.norm() < pivot_tol {
            return Err(Error::RankDeficient(p.norm()));
        }
        x[i] = s / p;
    }
    Ok(x)
}

/// Solves the square system `A x = rhs` by LU with partial pivoting.
pub fn lu_solve(a: &DenseMatrix, rhs: &[Scalar]) -> Result<Vec<Scalar>> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let tol = f64::EPSILON * a.max_abs() * n as f64;

    let mut lu = a.clone();
    let mut x = rhs.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        // Pivot search.
        let mut p = k;
        let mut best = lu.get(k, k).norm();
        for i in k + 1..n {
            let cand = lu.get(i, k).norm();
            if cand > best {
                best = cand;
                p = i;
            }
        }
        if best <= tol {
            return Err(Error::SingularMatrix(best));
        }
        if p != k {
            for j in 0..n {
                let tmp = lu.get(k, j);
                lu.set(k, j, lu.get(p, j));
                lu.set(p, j, tmp);
            }
            x.swap(k, p);
            perm.swap(k, p);
        }
        let piv = lu.get(k, k);
        for i in k + 1..n {
            let factor = lu.get(i, k) / piv;
            lu.set(i, k, factor);
            for j in k + 1..n {
                let cur = lu.get(i, j);
                lu.set(i, j, cur - factor * lu.get(k, j));
            }
            let t = factor * x[k];
            x[i] -= t;
        }
    }
    // Back substitution.
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= lu.get(i, j) * x[j];
        }
        x[i] = s / lu.get(i, i);
    }
    Ok(x)
}
