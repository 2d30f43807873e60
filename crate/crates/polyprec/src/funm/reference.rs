//! Dense reference oracles for small instances: Schur-based and
//! eigendecomposition-based evaluation of `A^{-1/2} b`, `A^{1/2} b` and
//! `sign(A) b`. These back every `true_rel_err` column.

use super::FunmKind;
use crate::error::{Error, Result};
use crate::linalg::{
    dense_inv_sqrtm_times, lu_solve, norm2, on_branch_cut, real_sym_eigen, schur, DenseMatrix,
};
use crate::operators::SparseMatrix;
use crate::Scalar;
use num_complex::Complex64;

/// Which dense route to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OraclePath {
    /// Hermitian goes through the symmetric eigensolver, anything else
    /// through the Schur form (with an eigendecomposition fallback for
    /// singular square roots).
    Auto,
    Schur,
    Eigen,
}

const DENSE_LIMIT: usize = 2000;

/// Dense reference for `f(A) b`. Feasible for `n <= 2000`.
pub fn reference_solution(
    a: &SparseMatrix,
    b: &[Scalar],
    kind: FunmKind,
    path: OraclePath,
) -> Result<Vec<Scalar>> {
    if a.dim() > DENSE_LIMIT {
        return Err(Error::Config(format!(
            "dense oracle limited to n <= {DENSE_LIMIT}, got {}",
            a.dim()
        )));
    }
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.len(),
        });
    }
    let dense = a.to_dense();
    let hermitian = a.is_real(1e-13) && a.hermitian_deviation() <= 1e-13 * a.max_abs().max(1.0);

    match kind {
        FunmKind::InvSqrt => match path {
            OraclePath::Schur => dense_inv_sqrtm_times(&dense, b),
            OraclePath::Eigen => eigen_apply(&dense, hermitian, b, invsqrt_of),
            OraclePath::Auto => {
                if hermitian {
                    eigen_apply(&dense, true, b, invsqrt_of)
                } else {
                    dense_inv_sqrtm_times(&dense, b)
                }
            }
        },
        FunmKind::Sqrt => {
            let zero_tol = 1e-12 * dense.frobenius_norm().max(1.0);
            let sqrt_fn = move |lam: Scalar| -> Result<Scalar> {
                if lam.norm() <= zero_tol {
                    // Semi-simple zero eigenvalue: the square root maps it
                    // to zero.
                    Ok(Complex64::new(0.0, 0.0))
                } else if on_branch_cut(lam, zero_tol) {
                    Err(Error::BranchCutViolation {
                        re: lam.re,
                        im: lam.im,
                    })
                } else {
                    Ok(lam.sqrt())
                }
            };
            match path {
                OraclePath::Schur => {
                    let x = crate::linalg::dense_sqrtm(&dense)?;
                    Ok(x.matvec(b))
                }
                OraclePath::Eigen => eigen_apply(&dense, hermitian, b, sqrt_fn),
                OraclePath::Auto => eigen_apply(&dense, hermitian, b, sqrt_fn),
            }
        }
        FunmKind::Sign => match path {
            OraclePath::Eigen if hermitian => eigen_apply(&dense, true, b, sign_of),
            OraclePath::Auto if hermitian => eigen_apply(&dense, true, b, sign_of),
            _ => {
                // sign(A) b = A (A^2)^{-1/2} b with the Schur-based dense
                // inverse square root.
                let a2 = dense.matmul(&dense);
                let w = dense_inv_sqrtm_times(&a2, b)?;
                Ok(dense.matvec(&w))
            }
        },
    }
}

fn invsqrt_of(lam: Scalar) -> Result<Scalar> {
    if on_branch_cut(lam, 1e-14 * lam.norm().max(1.0)) {
        return Err(Error::BranchCutViolation {
            re: lam.re,
            im: lam.im,
        });
    }
    Ok(Complex64::new(1.0, 0.0) / lam.sqrt())
}

fn sign_of(lam: Scalar) -> Result<Scalar> {
    if lam.re == 0.0 {
        return Err(Error::BranchCutViolation {
            re: lam.re,
            im: lam.im,
        });
    }
    Ok(Complex64::new(if lam.re > 0.0 { 1.0 } else { -1.0 }, 0.0))
}

/// Applies `f(A) b` through an eigendecomposition: the symmetric solver
/// for Hermitian input, Schur plus triangular eigenvector extraction for
/// general diagonalizable matrices.
fn eigen_apply<F>(dense: &DenseMatrix, hermitian: bool, b: &[Scalar], f: F) -> Result<Vec<Scalar>>
where
    F: Fn(Scalar) -> Result<Scalar>,
{
    if hermitian {
        let (vals, vecs) = real_sym_eigen(dense)?;
        let w = vecs.adjoint().matvec(b);
        let mut scaled = Vec::with_capacity(vals.len());
        for (lam, wi) in vals.iter().zip(w.iter()) {
            scaled.push(f(Complex64::new(*lam, 0.0))? * wi);
        }
        Ok(vecs.matvec(&scaled))
    } else {
        let (vals, x) = general_eigendecomposition(dense)?;
        let w = lu_solve(&x, b)?;
        let mut scaled = Vec::with_capacity(vals.len());
        for (lam, wi) in vals.iter().zip(w.iter()) {
            scaled.push(f(*lam)? * wi);
        }
        Ok(x.matvec(&scaled))
    }
}

/// Ascending dense spectrum of a real symmetric sparse matrix.
pub fn hermitian_spectrum(a: &SparseMatrix) -> Result<Vec<f64>> {
    if a.dim() > DENSE_LIMIT {
        return Err(Error::Config(format!(
            "dense spectrum limited to n <= {DENSE_LIMIT}, got {}",
            a.dim()
        )));
    }
    let (vals, _) = real_sym_eigen(&a.to_dense())?;
    Ok(vals)
}

/// Eigenvalues and (right) eigenvector matrix of a diagonalizable matrix,
/// via the Schur form and triangular back-substitution. Ill-conditioned
/// for strongly non-normal input; the oracles that use it carry
/// correspondingly loose tolerances.
pub(crate) fn general_eigendecomposition(
    dense: &DenseMatrix,
) -> Result<(Vec<Scalar>, DenseMatrix)> {
    let s = schur(dense)?;
    let n = s.size();
    let t = &s.t;
    let scale = t.frobenius_norm().max(1e-300);
    let mut x = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let lam = t.get(i, i);
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[i] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in j + 1..=i {
                acc += t.get(j, k) * v[k];
            }
            let mut den = t.get(j, j) - lam;
            if den.norm() < f64::EPSILON * scale {
                // Clustered eigenvalues: nudge the denominator, as dense
                // eigensolvers conventionally do.
                den = Complex64::new(f64::EPSILON * scale, 0.0);
            }
            v[j] = -acc / den;
        }
        let nrm = norm2(&v);
        for (row, val) in v.iter().enumerate() {
            x.set(row, i, val / nrm);
        }
    }
    let vecs = s.q.matmul(&x);
    Ok((t.diag(), vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sub_vec;
    use crate::operators::rng::SplitMix64;

    fn to_sparse(d: &DenseMatrix) -> SparseMatrix {
        let n = d.rows();
        let trips = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = d.get(i, j);
                if v.norm() > 0.0 {
                    Some((i, j, v))
                } else {
                    None
                }
            })
            .collect();
        SparseMatrix::from_triplets(n, trips).unwrap()
    }

    #[test]
    fn identity_for_all_three_functions() {
        let a = SparseMatrix::identity(4);
        let b: Vec<Scalar> = (0..4)
            .map(|i| Complex64::new(i as f64 + 1.0, 0.0))
            .collect();
        for kind in [FunmKind::InvSqrt, FunmKind::Sqrt, FunmKind::Sign] {
            let r = reference_solution(&a, &b, kind, OraclePath::Auto).unwrap();
            assert!(norm2(&sub_vec(&r, &b)) < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn scalar_diagonal_cases() {
        let a = SparseMatrix::from_triplets(1, vec![(0, 0, Complex64::new(4.0, 0.0))]).unwrap();
        let b = vec![Complex64::new(1.0, 0.0)];
        let inv = reference_solution(&a, &b, FunmKind::InvSqrt, OraclePath::Auto).unwrap();
        assert!((inv[0] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        let sq = reference_solution(&a, &b, FunmKind::Sqrt, OraclePath::Auto).unwrap();
        assert!((sq[0] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        let sg = reference_solution(&a, &b, FunmKind::Sign, OraclePath::Auto).unwrap();
        assert!((sg[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn schur_and_eigen_paths_agree_on_normal_matrices() {
        // Normal nonsymmetric matrix: orthogonal similarity of a diagonal
        // complex spectrum (built from 2x2 rotation blocks).
        let mut rng = SplitMix64::new(17);
        let n = 12;
        let mut dense = DenseMatrix::zeros(n, n);
        for k in 0..n / 2 {
            let re = 1.0 + 3.0 * rng.next_f64();
            let im = 0.5 * rng.next_normal();
            dense.set(2 * k, 2 * k, Complex64::new(re, 0.0));
            dense.set(2 * k, 2 * k + 1, Complex64::new(im, 0.0));
            dense.set(2 * k + 1, 2 * k, Complex64::new(-im, 0.0));
            dense.set(2 * k + 1, 2 * k + 1, Complex64::new(re, 0.0));
        }
        let a = to_sparse(&dense);
        let b: Vec<Scalar> = (0..n)
            .map(|_| Complex64::new(rng.next_normal(), 0.0))
            .collect();
        for kind in [FunmKind::InvSqrt, FunmKind::Sqrt] {
            let via_schur = reference_solution(&a, &b, kind, OraclePath::Schur).unwrap();
            let via_eigen = reference_solution(&a, &b, kind, OraclePath::Eigen).unwrap();
            let diff = norm2(&sub_vec(&via_schur, &via_eigen)) / norm2(&via_schur);
            assert!(diff <= 1e-11, "{kind:?} paths differ by {diff:.3e}");
        }
    }

    #[test]
    fn singular_semisimple_sqrt_handled_by_eigen_path() {
        // diag(4, 9, 0): semi-simple zero eigenvalue.
        let a = SparseMatrix::from_triplets(
            3,
            vec![
                (0, 0, Complex64::new(4.0, 0.0)),
                (1, 1, Complex64::new(9.0, 0.0)),
            ],
        )
        .unwrap();
        let b = vec![Complex64::new(1.0, 0.0); 3];
        let r = reference_solution(&a, &b, FunmKind::Sqrt, OraclePath::Auto).unwrap();
        assert!((r[0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        assert!(r[2].norm() < 1e-12);
    }

    #[test]
    fn hermitian_indefinite_sign() {
        let a = SparseMatrix::from_triplets(
            2,
            vec![
                (0, 0, Complex64::new(2.0, 0.0)),
                (1, 1, Complex64::new(-3.0, 0.0)),
            ],
        )
        .unwrap();
        let b = vec![Complex64::new(5.0, 0.0), Complex64::new(7.0, 0.0)];
        let r = reference_solution(&a, &b, FunmKind::Sign, OraclePath::Auto).unwrap();
        assert!((r[0] - Complex64::new(5.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(-7.0, 0.0)).norm() < 1e-12);
        // The Schur route (via A (A^2)^{-1/2} b) agrees.
        let r2 = reference_solution(&a, &b, FunmKind::Sign, OraclePath::Schur).unwrap();
        assert!(norm2(&sub_vec(&r, &r2)) < 1e-11);
    }

    #[test]
    fn oracle_size_limit_enforced() {
        let a = SparseMatrix::identity(2001);
        let b = vec![Complex64::new(1.0, 0.0); 2001];
        assert!(matches!(
            reference_solution(&a, &b, FunmKind::InvSqrt, OraclePath::Auto),
            Err(Error::Config(_))
        ));
    }
}
