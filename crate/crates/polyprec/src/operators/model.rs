//! Model problem generators: finite-difference Laplacians with known
//! spectra, in-degree graph Laplacians, and a small synthetic non-Hermitian
//! operator with verified right-half-plane spectrum.

use super::rng::SplitMix64;
use super::SparseMatrix;
use crate::error::{Error, Result};
use crate::linalg::schur;
use crate::Scalar;
use std::f64::consts::PI;

/// Dimensionality of the finite-difference negative Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplaceFamily {
    D1,
    D2,
    D3,
}

impl LaplaceFamily {
    pub fn dims(self) -> usize {
        match self {
            LaplaceFamily::D1 => 1,
            LaplaceFamily::D2 => 2,
            LaplaceFamily::D3 => 3,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "laplace1d" => Some(LaplaceFamily::D1),
            "laplace2d" => Some(LaplaceFamily::D2),
            "laplace3d" => Some(LaplaceFamily::D3),
            _ => None,
        }
    }
}

/// Standard second-order finite-difference negative Laplacian with
/// homogeneous Dirichlet boundary on a grid with `n` interior points per
/// direction: diagonal `2 * dims`, off-diagonals `-1`.
pub fn make_laplace(family: LaplaceFamily, n: usize) -> SparseMatrix {
    assert!(n >= 1);
    let dims = family.dims();
    let total = n.pow(dims as u32);
    let one = Scalar::new(-1.0, 0.0);
    let diag = Scalar::new(2.0 * dims as f64, 0.0);
    let mut triplets = Vec::with_capacity(total * (1 + 2 * dims));

    let strides: Vec<usize> = (0..dims).map(|d| n.pow(d as u32)).collect();
    for idx in 0..total {
        triplets.push((idx, idx, diag));
        let mut rem = idx;
        for d in 0..dims {
            let coord = rem % n;
            rem /= n;
            if coord > 0 {
                triplets.push((idx, idx - strides[d], one));
            }
            if coord + 1 < n {
                triplets.push((idx, idx + strides[d], one));
            }
        }
    }
    SparseMatrix::from_triplets(total, triplets).expect("laplacian triplets are valid")
}

/// Closed-form extreme eigenvalues of [`make_laplace`]:
/// `dims * (2 - 2 cos(pi/(n+1)))` and `dims * (2 + 2 cos(pi/(n+1)))`.
pub fn laplace_extreme_eigenvalues(family: LaplaceFamily, n: usize) -> (f64, f64) {
    let dims = family.dims() as f64;
    let c = (PI / (n as f64 + 1.0)).cos();
    (dims * (2.0 - 2.0 * c), dims * (2.0 + 2.0 * c))
}

/// The full closed-form spectrum of [`make_laplace`], sorted ascending.
/// Eigenvalues are sums `2 - 2 cos(k pi/(n+1))` over one index per
/// dimension.
pub fn laplace_spectrum(family: LaplaceFamily, n: usize) -> Vec<f64> {
    let modes: Vec<f64> = (1..=n)
        .map(|k| 2.0 - 2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos())
        .collect();
    let mut eigs = Vec::new();
    match family {
        LaplaceFamily::D1 => eigs.extend_from_slice(&modes),
        LaplaceFamily::D2 => {
            for &a in &modes {
                for &b in &modes {
                    eigs.push(a + b);
                }
            }
        }
        LaplaceFamily::D3 => {
            for &a in &modes {
                for &b in &modes {
                    for &c in &modes {
                        eigs.push(a + b + c);
                    }
                }
            }
        }
    }
    eigs.sort_by(f64::total_cmp);
    eigs
}

/// In-degree graph Laplacian `L = D_in - A` of a directed adjacency
/// matrix; every column of `L` sums to zero.
pub fn make_graph_laplacian(adjacency: &SparseMatrix) -> SparseMatrix {
    let n = adjacency.dim();
    let in_degrees = adjacency.column_sums();
    let mut triplets = Vec::with_capacity(adjacency.nnz() + n);
    for (j, &d) in in_degrees.iter().enumerate() {
        triplets.push((j, j, d));
    }
    for i in 0..n {
        let (cols, vals) = adjacency.row(i);
        for (&j, &v) in cols.iter().zip(vals.iter()) {
            triplets.push((i, j, -v));
        }
    }
    SparseMatrix::from_triplets(n, triplets).expect("laplacian triplets are valid")
}

/// Random digraph adjacency matrix: a Hamiltonian cycle (so the graph is
/// strongly connected and the Laplacian kernel is one-dimensional) plus
/// `extra_edges` random arcs without self-loops. All weights are 1.
pub fn random_digraph_adjacency(n: usize, extra_edges: usize, seed: u64) -> SparseMatrix {
    assert!(n >= 2);
    let mut rng = SplitMix64::new(seed);
    let one = Scalar::new(1.0, 0.0);
    let mut triplets: Vec<(usize, usize, Scalar)> = (0..n).map(|i| (i, (i + 1) % n, one)).collect();
    let mut added = 0;
    while added < extra_edges {
        let i = rng.below(n);
        let j = rng.below(n);
        if i == j || (j + n - i) % n == 1 {
            continue;
        }
        triplets.push((i, j, one));
        added += 1;
    }
    // Duplicate arcs collapse to weight sums; keep them at 1.
    let mut seen = std::collections::HashSet::new();
    triplets.retain(|&(i, j, _)| seen.insert((i, j)));
    SparseMatrix::from_triplets(n, triplets).expect("adjacency triplets are valid")
}

/// Sparse nonsymmetric test operator: the 1-D Laplacian plus a scaled
/// random skew-symmetric perturbation. The Hermitian part is unchanged by
/// the perturbation, so the field of values (and the spectrum) stays right
/// of `Re z = lambda_min(S) > 0.05 * lambda_min(S)`.
///
/// For `n <= 500` the spectrum is verified densely; an eigenvalue with
/// `Re <= 0` raises [`Error::SpectrumLeak`].
pub fn synthetic_nonhermitian_with_scale(n: usize, seed: u64, scale: f64) -> Result<SparseMatrix> {
    assert!(n >= 2);
    let mut rng = SplitMix64::new(seed);
    let mut triplets = Vec::with_capacity(5 * n);
    for i in 0..n {
        triplets.push((i, i, Scalar::new(2.0, 0.0)));
        if i > 0 {
            triplets.push((i, i - 1, Scalar::new(-1.0, 0.0)));
        }
        if i + 1 < n {
            triplets.push((i, i + 1, Scalar::new(-1.0, 0.0)));
        }
    }
    if scale != 0.0 {
        let pairs = 2 * n;
        for _ in 0..pairs {
            let i = rng.below(n);
            let j = rng.below(n);
            if i == j {
                continue;
            }
            let v = scale * rng.next_normal();
            triplets.push((i, j, Scalar::new(v, 0.0)));
            triplets.push((j, i, Scalar::new(-v, 0.0)));
        }
    }
    let a = SparseMatrix::from_triplets(n, triplets)?;
    if n <= 500 {
        let s = schur(&a.to_dense())?;
        for lam in s.eigenvalues() {
            if lam.re <= 0.0 {
                return Err(Error::SpectrumLeak {
                    re: lam.re,
                    im: lam.im,
                });
            }
        }
    }
    Ok(a)
}

/// Default synthetic non-Hermitian operator (skew scale 0.25).
pub fn make_synthetic_nonhermitian(n: usize, seed: u64) -> Result<SparseMatrix> {
    synthetic_nonhermitian_with_scale(n, seed, 0.25)
}
