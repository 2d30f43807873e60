//! Dense real/complex kernels for the small matrices arising in the Krylov
//! drivers: Hessenberg matrices `H_m`, contour node systems and
//! least-squares problems. Everything is double precision.

mod lstsq;
mod schur;
mod sqrtm;
mod tridiag;

#[cfg(test)]
pub(crate) mod tests_support;

pub use lstsq::{lstsq, lu_solve};
pub use schur::{hessenberg_schur, schur, SchurForm};
pub use sqrtm::{dense_inv_sqrtm_times, dense_sqrtm};
pub use tridiag::symmetric_tridiag_eigen;

pub(crate) use tridiag::real_sym_eigen;

use crate::error::{Error, Result};
use crate::Scalar;
use num_complex::Complex64;

/// Row-major dense matrix of complex scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            entries: vec![Scalar::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::new(1.0, 0.0));
        }
        m
    }

    /// Builds from a row-major entry slice; `entries.len()` must equal `rows * cols`.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Scalar>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(DenseMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<Scalar>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            entries.extend_from_slice(row);
        }
        DenseMatrix {
            rows: r,
            cols: c,
            entries,
        }
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diag(diag: &[Scalar]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.entries[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_assign_at(&mut self, i: usize, j: usize, v: Scalar) {
        self.entries[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn diag(&self) -> Vec<Scalar> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Scalar::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.add_assign_at(i, j, a * rhs.get(k, j));
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, x.len());
        let mut out = vec![Scalar::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Scalar::new(0.0, 0.0);
            let row = self.row(i);
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            out[i] = acc;
        }
        out
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let entries = self
            .entries
            .iter()
            .zip(rhs.entries.iter())
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn scale(&self, s: Scalar) -> DenseMatrix {
        let entries = self.entries.iter().map(|a| a * s).collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// True when all entries below the first subdiagonal vanish.
    pub fn is_upper_hessenberg(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 2..self.rows {
            for j in 0..i - 1 {
                if self.get(i, j).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Max-norm Hermitian deviation `max |a_ij - conj(a_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// Largest imaginary-part magnitude over all entries.
    pub fn max_imag(&self) -> f64 {
        self.entries.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// True when the matrix is, to `tol`, a real symmetric tridiagonal matrix.
    pub fn is_real_sym_tridiagonal(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        if self.max_imag() > tol || self.hermitian_deviation() > tol {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if (j + 1 < i || j > i + 1) && self.get(i, j).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Vector helpers. Plain free functions over &[Complex64].
// ---------------------------------------------------------------------------

/// Euclidean inner product `<x, y> = x^* y` (conjugate-linear in the first argument).
pub fn dot(x: &[Scalar], y: &[Scalar]) -> Scalar {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in x.iter().zip(y.iter()) {
        acc += a.conj() * b;
    }
    acc
}

pub fn norm2(x: &[Scalar]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// y += alpha * x
pub fn axpy(alpha: Scalar, x: &[Scalar], y: &mut [Scalar]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += alpha * xi;
    }
}

pub fn scale_vec(alpha: Scalar, x: &[Scalar]) -> Vec<Scalar> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn sub_vec(x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y.iter()).map(|(a, b)| a - b).collect()
}

/// Relative difference `||x - y|| / ||x||`, with 0/0 treated as 0.
pub fn rel_diff(x: &[Scalar], y: &[Scalar]) -> f64 {
    let nx = norm2(x);
    let d = norm2(&sub_vec(x, y));
    if nx == 0.0 {
        if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        d / nx
    }
}

/// Promotes a real slice to complex.
pub fn to_complex(x: &[f64]) -> Vec<Scalar> {
    x.iter().map(|&v| Scalar::new(v, 0.0)).collect()
}

/// Principal complex square root (branch cut on the negative real axis).
pub fn principal_sqrt(z: Scalar) -> Scalar {
    z.sqrt()
}

/// Principal inverse square root `z^{-1/2}`.
pub fn inv_sqrt(z: Scalar) -> Scalar {
    Scalar::new(1.0, 0.0) / z.sqrt()
}

/// True when `z` lies on the branch cut `(-inf, 0]` to within `tol`.
pub fn on_branch_cut(z: Scalar, tol: f64) -> bool {
    z.im.abs() <= tol && z.re <= tol
}
