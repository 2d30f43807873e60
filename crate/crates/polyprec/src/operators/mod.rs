//! Sparse matrices, instrumented matrix-free operators, model problems and
//! Matrix Market ingestion.

mod matrix_market;
mod model;
pub mod rng;

pub use matrix_market::{parse_matrix_market, read_matrix_market, write_matrix_market};
pub use model::{
    laplace_extreme_eigenvalues, laplace_spectrum, make_graph_laplacian, make_laplace,
    make_synthetic_nonhermitian, random_digraph_adjacency, synthetic_nonhermitian_with_scale,
    LaplaceFamily,
};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::poly::PrecondPoly;
use crate::Scalar;
use std::cell::{Cell, RefCell};
use std::rc::Rc;
use std::sync::Arc;

/// Compressed-row sparse matrix over complex scalars.
///
/// Immutable after construction; within each row, column indices are
/// strictly increasing.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Scalar>,
}

impl SparseMatrix {
    /// Builds from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, Scalar)>) -> Result<Self> {
        for &(i, j, _) in &triplets {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: i.max(j) + 1,
                });
            }
        }
        triplets.sort_by_key(|&(i, j, _)| (i, j));

        let mut entries: Vec<(usize, usize, Scalar)> = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            match entries.last_mut() {
                Some((pi, pj, pv)) if *pi == i && *pj == j => *pv += v,
                _ => entries.push((i, j, v)),
            }
        }

        let mut row_ptr = vec![0usize; n + 1];
        for &(i, _, _) in &entries {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = entries.iter().map(|e| e.1).collect();
        let values = entries.iter().map(|e| e.2).collect();
        Ok(SparseMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        let triplets = (0..n).map(|i| (i, i, Scalar::new(1.0, 0.0))).collect();
        Self::from_triplets(n, triplets).expect("identity triplets are valid")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Row `i` as parallel (column, value) slices.
    pub fn row(&self, i: usize) -> (&[usize], &[Scalar]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn matvec(&self, x: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![Scalar::new(0.0, 0.0); self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = Scalar::new(0.0, 0.0);
            for (&j, &v) in cols.iter().zip(vals.iter()) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals.iter()) {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol)
    }

    /// Max-norm deviation from Hermitian symmetry.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals.iter()) {
                let vji = self.get(j, i);
                dev = dev.max((v - vji.conj()).norm());
            }
            // Entries present at (j, i) but absent at (i, j) are caught when
            // row j is scanned.
        }
        dev
    }

    /// Entry lookup by binary search within the row.
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => Scalar::new(0.0, 0.0),
        }
    }

    /// Per-column sums (used by graph-Laplacian checks).
    pub fn column_sums(&self) -> Vec<Scalar> {
        let mut sums = vec![Scalar::new(0.0, 0.0); self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals.iter()) {
                sums[j] += v;
            }
        }
        sums
    }
}

/// Monotone tallies of matrix-vector products and inner products.
#[derive(Debug, Default)]
pub struct OpCounters {
    mvms: Cell<u64>,
    inner_products: Cell<u64>,
}

impl OpCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mvms(&self) -> u64 {
        self.mvms.get()
    }

    pub fn inner_products(&self) -> u64 {
        self.inner_products.get()
    }

    pub fn add_mvms(&self, k: u64) {
        self.mvms.set(self.mvms.get() + k);
    }

    pub fn add_inner_products(&self, k: u64) {
        self.inner_products.set(self.inner_products.get() + k);
    }
}

/// Which side of the three-stage preconditioned product the polynomial is
/// applied on first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecSide {
    /// `w = q(A) q(A) (A v)` — Krylov vectors live in the preconditioned space.
    Left,
    /// `w = A (q(A) q(A) v)` — the first-stage products `q(A)v_j` can be kept.
    Right,
}

enum OpKind {
    Plain(Arc<SparseMatrix>),
    Squared(Arc<SparseMatrix>),
    Shifted(Arc<SparseMatrix>, Scalar),
    /// Diagonal operator over explicit nodes (contour-space Arnoldi).
    NodeDiag(Vec<Scalar>),
    Preconditioned {
        base: Box<LinearOperator>,
        q: Arc<dyn PrecondPoly>,
        side: PrecSide,
        capture: Option<RefCell<Vec<Vec<Scalar>>>>,
    },
}

/// A matrix-free "apply to vector" capability with instrumentation.
///
/// One counter-bearing operator must not be shared between threads;
/// independent runs build their own operators over a shared
/// [`SparseMatrix`].
pub struct LinearOperator {
    kind: OpKind,
    counters: Rc<OpCounters>,
}

impl LinearOperator {
    pub fn plain(a: Arc<SparseMatrix>) -> Self {
        Self::plain_with(a, Rc::new(OpCounters::new()))
    }

    pub fn plain_with(a: Arc<SparseMatrix>, counters: Rc<OpCounters>) -> Self {
        LinearOperator {
            kind: OpKind::Plain(a),
            counters,
        }
    }

    pub fn squared(a: Arc<SparseMatrix>) -> Self {
        Self::squared_with(a, Rc::new(OpCounters::new()))
    }

    pub fn squared_with(a: Arc<SparseMatrix>, counters: Rc<OpCounters>) -> Self {
        LinearOperator {
            kind: OpKind::Squared(a),
            counters,
        }
    }

    pub fn shifted(a: Arc<SparseMatrix>, sigma: Scalar) -> Self {
        LinearOperator {
            kind: OpKind::Shifted(a, sigma),
            counters: Rc::new(OpCounters::new()),
        }
    }

    /// Diagonal operator over the given nodes, with its own counters.
    pub fn node_diag(nodes: Vec<Scalar>) -> Self {
        LinearOperator {
            kind: OpKind::NodeDiag(nodes),
            counters: Rc::new(OpCounters::new()),
        }
    }

    /// Wraps `base` as the polynomially preconditioned operator
    /// `A q(A)^2`, sharing its counters. With `capture` on (right side),
    /// the first-stage products `q(A)v` of every application are recorded.
    pub fn preconditioned(
        base: LinearOperator,
        q: Arc<dyn PrecondPoly>,
        side: PrecSide,
        capture: bool,
    ) -> Self {
        let counters = Rc::clone(&base.counters);
        LinearOperator {
            kind: OpKind::Preconditioned {
                base: Box::new(base),
                q,
                side,
                capture: if capture {
                    Some(RefCell::new(Vec::new()))
                } else {
                    None
                },
            },
            counters,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            OpKind::Plain(a) | OpKind::Squared(a) | OpKind::Shifted(a, _) => a.dim(),
            OpKind::NodeDiag(d) => d.len(),
            OpKind::Preconditioned { base, .. } => base.dim(),
        }
    }

    pub fn counters(&self) -> Rc<OpCounters> {
        Rc::clone(&self.counters)
    }

    pub fn mvm_count(&self) -> u64 {
        self.counters.mvms()
    }

    pub fn inner_product_count(&self) -> u64 {
        self.counters.inner_products()
    }

    pub fn count_inner_products(&self, k: u64) {
        self.counters.add_inner_products(k);
    }

    /// Applies the operator, incrementing the mvm counter by the exact
    /// number of sparse products performed (1 for plain, 2 for squared,
    /// `2d-1` per application for a preconditioned operator with a
    /// degree `d-1` polynomial).
    pub fn apply(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        match &self.kind {
            OpKind::Plain(a) => {
                self.counters.add_mvms(1);
                Ok(a.matvec(x))
            }
            OpKind::Squared(a) => {
                self.counters.add_mvms(2);
                Ok(a.matvec(&a.matvec(x)))
            }
            OpKind::Shifted(a, sigma) => {
                self.counters.add_mvms(1);
                let mut y = a.matvec(x);
                for (yi, xi) in y.iter_mut().zip(x.iter()) {
                    *yi -= sigma * xi;
                }
                Ok(y)
            }
            OpKind::NodeDiag(d) => {
                self.counters.add_mvms(1);
                Ok(d.iter().zip(x.iter()).map(|(di, xi)| di * xi).collect())
            }
            OpKind::Preconditioned {
                base,
                q,
                side,
                capture,
            } => match side {
                PrecSide::Left => {
                    let u = base.apply(x)?;
                    let y = q.apply(base, &u)?;
                    q.apply(base, &y)
                }
                PrecSide::Right => {
                    let y = q.apply(base, x)?;
                    if let Some(store) = capture {
                        store.borrow_mut().push(y.clone());
                    }
                    let u = q.apply(base, &y)?;
                    base.apply(&u)
                }
            },
        }
    }

    /// Drains the captured first-stage products of a right-preconditioned
    /// operator. Empty for every other kind.
    pub fn take_captured(&self) -> Vec<Vec<Scalar>> {
        match &self.kind {
            OpKind::Preconditioned {
                capture: Some(store),
                ..
            } => store.take(),
            _ => Vec::new(),
        }
    }

    /// Borrows the captured first-stage products without draining them.
    pub fn captured(&self) -> Option<std::cell::Ref<'_, Vec<Vec<Scalar>>>> {
        match &self.kind {
            OpKind::Preconditioned {
                capture: Some(store),
                ..
            } => Some(store.borrow()),
            _ => None,
        }
    }
}
