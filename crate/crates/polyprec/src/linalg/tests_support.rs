//! Shared helpers for linalg unit tests.

use super::{DenseMatrix, SchurForm};
use crate::Scalar;

pub use crate::operators::rng::SplitMix64 as Rng64;

pub fn random_matrix(n: usize, rng: &mut Rng64) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, Scalar::new(rng.next_normal(), 0.0));
        }
    }
    m
}

pub fn random_complex_matrix(n: usize, rng: &mut Rng64) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, Scalar::new(rng.next_normal(), rng.next_normal()));
        }
    }
    m
}

pub fn random_hessenberg(n: usize, rng: &mut Rng64) -> DenseMatrix {
    let mut m = random_complex_matrix(n, rng);
    for i in 2..n {
        for j in 0..i - 1 {
            m.set(i, j, Scalar::new(0.0, 0.0));
        }
    }
    m
}

/// Real symmetric positive definite `M M^T / n + shift I`.
pub fn random_spd(n: usize, shift: f64, rng: &mut Rng64) -> DenseMatrix {
    let m = random_matrix(n, rng);
    let mut a = m.matmul(&m.adjoint());
    let scale = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            let v = a.get(i, j) * scale;
            a.set(
                i,
                j,
                if i == j {
                    v + Scalar::new(shift, 0.0)
                } else {
                    v
                },
            );
        }
    }
    a
}

pub fn check_schur(a: &DenseMatrix, s: &SchurForm, rtol: f64) {
    let n = a.rows();
    let qhq = s.q.adjoint().matmul(&s.q);
    let unit_err = qhq.sub(&DenseMatrix::identity(n)).frobenius_norm();
    assert!(
        unit_err <= 1e-12 * n as f64,
        "Q not unitary: {unit_err:.3e}"
    );

    let rebuilt = s.q.matmul(&s.t).matmul(&s.q.adjoint());
    let a_norm = a.frobenius_norm().max(1e-300);
    let rec_err = rebuilt.sub(a).frobenius_norm() / a_norm;
    assert!(
        rec_err <= rtol,
        "reconstruction error {rec_err:.3e} > {rtol:.1e}"
    );

    for i in 1..n {
        for j in 0..i {
            assert!(
                s.t.get(i, j).norm() <= 1e-13 * a_norm,
                "T not triangular at ({i},{j})"
            );
        }
    }
}
