//! Principal matrix square root via the Schur-Parlett point recurrence,
//! with a fast eigensolver route for real symmetric input, and the
//! combined "inverse square root times vector" kernel used on Hessenberg
//! matrices by the Krylov drivers.

use super::schur::{hessenberg_schur, schur, SchurForm};
use super::tridiag::{real_sym_eigen, symmetric_tridiag_eigen};
use super::{on_branch_cut, DenseMatrix};
use crate::error::{Error, Result};
use crate::Scalar;
use num_complex::Complex64;

/// Hermitian-detection threshold on `max |a_ij - conj(a_ji)|`.
const HERMITIAN_TOL: f64 = 1e-13;
/// Branch-cut tolerance, relative to the Frobenius norm.
const BRANCH_CUT_REL: f64 = 1e-13;
/// Parlett denominator threshold.
const PARLETT_MIN_DENOM: f64 = 1e-14;
/// Pivot threshold for the triangular solve, relative to the Frobenius norm.
const PIVOT_REL: f64 = 1e-14;

enum Route {
    /// Real symmetric tridiagonal: go straight to the QL eigensolver.
    Tridiag,
    /// Dense real symmetric: tridiagonalize first.
    RealSym,
    /// Anything else: complex Schur.
    General,
}

fn pick_route(a: &DenseMatrix) -> Route {
    if a.is_real_sym_tridiagonal(HERMITIAN_TOL) {
        Route::Tridiag
    } else if a.max_imag() <= HERMITIAN_TOL && a.hermitian_deviation() <= HERMITIAN_TOL {
        Route::RealSym
    } else {
        Route::General
    }
}

fn eigen_route(a: &DenseMatrix, route: &Route) -> Result<(Vec<f64>, DenseMatrix)> {
    match route {
        Route::Tridiag => {
            let n = a.rows();
            let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
            let off: Vec<f64> = (0..n - 1).map(|i| a.get(i + 1, i).re).collect();
            symmetric_tridiag_eigen(&diag, &off)
        }
        Route::RealSym => real_sym_eigen(a),
        Route::General => unreachable!(),
    }
}

/// Square root of an upper triangular matrix by the (unblocked) Parlett
/// point recurrence.
fn parlett_sqrt_triangular(t: &DenseMatrix, branch_tol: f64) -> Result<DenseMatrix> {
    let n = t.rows();
    for i in 0..n {
        let lam = t.get(i, i);
        if on_branch_cut(lam, branch_tol) {
            return Err(Error::BranchCutViolation {
                re: lam.re,
                im: lam.im,
            });
        }
    }
    let mut u = DenseMatrix::zeros(n, n);
    for i in 0..n {
        u.set(i, i, t.get(i, i).sqrt());
    }
    for j in 1..n {
        for i in (0..j).rev() {
            let mut s = t.get(i, j);
            for k in i + 1..j {
                s -= u.get(i, k) * u.get(k, j);
            }
            let denom = u.get(i, i) + u.get(j, j);
            if denom.norm() < PARLETT_MIN_DENOM {
                return Err(Error::ZeroDiagonalPair(denom.norm()));
            }
            u.set(i, j, s / denom);
        }
    }
    Ok(u)
}

/// Principal matrix square root.
///
/// Requires the spectrum to avoid the closed negative real axis. Real
/// symmetric input is routed through the tridiagonal eigensolver, anything
/// else through the complex Schur form plus the Parlett recurrence.
pub fn dense_sqrtm(a: &DenseMatrix) -> Result<DenseMatrix> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let branch_tol = BRANCH_CUT_REL * a.frobenius_norm();
    match pick_route(a) {
        route @ (Route::Tridiag | Route::RealSym) => {
            let (vals, vecs) = eigen_route(a, &route)?;
            for &v in &vals {
                if on_branch_cut(Complex64::new(v, 0.0), branch_tol) {
                    return Err(Error::BranchCutViolation { re: v, im: 0.0 });
                }
            }
            let sq = DenseMatrix::from_diag(
                &vals
                    .iter()
                    .map(|&v| Complex64::new(v, 0.0).sqrt())
                    .collect::<Vec<_>>(),
            );
            Ok(vecs.matmul(&sq).matmul(&vecs.adjoint()))
        }
        Route::General => {
            let s = decompose(a)?;
            let u = parlett_sqrt_triangular(&s.t, branch_tol)?;
            let _ = n;
            Ok(s.q.matmul(&u).matmul(&s.q.adjoint()))
        }
    }
}

fn decompose(a: &DenseMatrix) -> Result<SchurForm> {
    if a.is_upper_hessenberg(0.0) {
        hessenberg_schur(a)
    } else {
        schur(a)
    }
}

/// Computes `A^{-1/2} v` for a small dense matrix: square root via the
/// appropriate route, then a triangular (or diagonal) solve.
pub fn dense_inv_sqrtm_times(a: &DenseMatrix, v: &[Scalar]) -> Result<Vec<Scalar>> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let a_norm = a.frobenius_norm();
    let branch_tol = BRANCH_CUT_REL * a_norm;
    let pivot_tol = PIVOT_REL * a_norm;

    match pick_route(a) {
        route @ (Route::Tridiag | Route::RealSym) => {
            let (vals, vecs) = eigen_route(a, &route)?;
            for &lam in &vals {
                if on_branch_cut(Complex64::new(lam, 0.0), branch_tol) {
                    return Err(Error::BranchCutViolation { re: lam, im: 0.0 });
                }
            }
            // result = V diag(lambda^{-1/2}) V^T v
            let w = vecs.adjoint().matvec(v);
            let mut scaled = Vec::with_capacity(n);
            for (i, &lam) in vals.iter().enumerate() {
                let root = Complex64::new(lam, 0.0).sqrt();
                if root.norm() < pivot_tol {
                    return Err(Error::SingularMatrix(root.norm()));
                }
                scaled.push(w[i] / root);
            }
            Ok(vecs.matvec(&scaled))
        }
        Route::General => {
            let s = decompose(a)?;
            let u = parlett_sqrt_triangular(&s.t, branch_tol)?;
            let y = s.q.adjoint().matvec(v);
            let z = solve_upper_triangular(&u, &y, pivot_tol)?;
            Ok(s.q.matvec(&z))
        }
    }
}

fn solve_upper_triangular(u: &DenseMatrix, rhs: &[Scalar], pivot_tol: f64) -> Result<Vec<Scalar>> {
    let n = u.rows();
    let mut x = rhs.to_vec();
    for i in (0..n).rev() {
        for j in i + 1..n {
            let t = u.get(i, j) * x[j];
            x[i] -= t;
        }
        let p = u.get(i, i);
        if p.norm() < pivot_tol {
            return Err(Error::SingularMatrix(p.norm()));
        }
        x[i] /= p;
    }
    Ok(x)
}
