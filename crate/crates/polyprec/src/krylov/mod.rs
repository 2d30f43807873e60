//! Arnoldi and Lanczos processes with instrumented inner-product counts,
//! Ritz and harmonic Ritz extraction, and the two-pass basis
//! reconstruction used when Lanczos vectors are not stored.

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, hessenberg_schur, lu_solve, norm2, scale_vec, DenseMatrix};
use crate::operators::LinearOperator;
use crate::Scalar;
use num_complex::Complex64;

/// Relative breakdown tolerance: `h_{j+1,j} <= 1e-14 * ||start||` ends the
/// process with an exact invariant subspace.
const BREAKDOWN_REL: f64 = 1e-14;

/// Orthonormal Krylov basis `V_m`, upper Hessenberg `H_m`, the residual
/// coefficient `h_{m+1,m}` and the next basis vector (absent on breakdown).
#[derive(Debug, Clone)]
pub struct ArnoldiDecomposition {
    pub basis: Vec<Vec<Scalar>>,
    pub h: DenseMatrix,
    pub h_next: f64,
    pub v_next: Option<Vec<Scalar>>,
    pub beta: f64,
}

impl ArnoldiDecomposition {
    pub fn steps(&self) -> usize {
        self.basis.len()
    }
}

/// Incremental Arnoldi driver: one modified Gram-Schmidt step at a time,
/// with an optional full second sweep per vector.
pub struct ArnoldiProcess<'a> {
    op: &'a LinearOperator,
    reorth: bool,
    breakdown_tol: f64,
    basis: Vec<Vec<Scalar>>,
    hcols: Vec<Vec<Scalar>>,
    beta: f64,
    broke_down: bool,
}

impl<'a> ArnoldiProcess<'a> {
    pub fn new(op: &'a LinearOperator, start: &[Scalar], reorth: bool) -> Result<Self> {
        if start.len() != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                got: start.len(),
            });
        }
        let beta = norm2(start);
        if beta == 0.0 {
            return Err(Error::ZeroStartVector);
        }
        let v1 = scale_vec(Complex64::new(1.0 / beta, 0.0), start);
        Ok(ArnoldiProcess {
            op,
            reorth,
            breakdown_tol: BREAKDOWN_REL * beta,
            basis: vec![v1],
            hcols: Vec::new(),
            beta,
            broke_down: false,
        })
    }

    /// Completed steps (the dimension of the available `H`).
    pub fn steps(&self) -> usize {
        self.hcols.len()
    }

    pub fn broke_down(&self) -> bool {
        self.broke_down
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.basis
    }

    /// Runs one Arnoldi step. Returns `false` when the process has
    /// (lucky-)broken down, in which case the Krylov subspace is invariant
    /// and the decomposition is exact.
    pub fn step(&mut self) -> Result<bool> {
        if self.broke_down {
            return Ok(false);
        }
        let j = self.hcols.len();
        let mut w = self.op.apply(&self.basis[j])?;

        let mut col: Vec<Scalar> = Vec::with_capacity(j + 2);
        for v in &self.basis {
            let h = dot(v, &w);
            axpy(-h, v, &mut w);
            col.push(h);
        }
        self.op.count_inner_products((j + 1) as u64);
        if self.reorth {
            for (i, v) in self.basis.iter().enumerate() {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
                col[i] += c;
            }
            self.op.count_inner_products((j + 1) as u64);
        }
        let hnorm = norm2(&w);
        self.op.count_inner_products(1);
        col.push(Scalar::new(hnorm, 0.0));
        self.hcols.push(col);

        if hnorm <= self.breakdown_tol {
            self.broke_down = true;
            return Ok(false);
        }
        self.basis
            .push(scale_vec(Complex64::new(1.0 / hnorm, 0.0), &w));
        Ok(true)
    }

    /// The leading `m x m` Hessenberg matrix, `m <= steps()`.
    pub fn hessenberg(&self, m: usize) -> DenseMatrix {
        assert!(m <= self.hcols.len());
        let mut h = DenseMatrix::zeros(m, m);
        for (jj, col) in self.hcols.iter().take(m).enumerate() {
            for (ii, &v) in col.iter().enumerate() {
                if ii < m {
                    h.set(ii, jj, v);
                }
            }
        }
        h
    }

    /// Residual coefficient `h_{m+1,m}` after all completed steps.
    pub fn h_next(&self) -> f64 {
        if self.broke_down {
            0.0
        } else {
            self.hcols
                .last()
                .map(|c| c.last().unwrap().re)
                .unwrap_or(0.0)
        }
    }

    pub fn into_decomposition(mut self) -> ArnoldiDecomposition {
        let m = self.hcols.len();
        let h = self.hessenberg(m);
        let h_next = self.h_next();
        let v_next = if self.broke_down || self.basis.len() <= m {
            None
        } else {
            Some(self.basis.pop().unwrap())
        };
        self.basis.truncate(m);
        ArnoldiDecomposition {
            basis: self.basis,
            h,
            h_next,
            v_next,
            beta: self.beta,
        }
    }
}

/// Runs `m` Arnoldi steps (fewer on breakdown) and returns the
/// decomposition.
pub fn arnoldi(
    op: &LinearOperator,
    start: &[Scalar],
    m: usize,
    reorth: bool,
) -> Result<ArnoldiDecomposition> {
    assert!(m >= 1);
    let mut proc = ArnoldiProcess::new(op, start, reorth)?;
    for _ in 0..m {
        if !proc.step()? {
            break;
        }
    }
    Ok(proc.into_decomposition())
}

/// Tridiagonal Lanczos decomposition; the basis is stored only on request.
#[derive(Debug, Clone)]
pub struct TridiagDecomposition {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub h_next: f64,
    pub basis: Option<Vec<Vec<Scalar>>>,
    pub beta: f64,
}

impl TridiagDecomposition {
    pub fn steps(&self) -> usize {
        self.diag.len()
    }

    /// The tridiagonal `H_m` as a dense matrix.
    pub fn hessenberg(&self) -> DenseMatrix {
        let m = self.diag.len();
        let mut h = DenseMatrix::zeros(m, m);
        for i in 0..m {
            h.set(i, i, Scalar::new(self.diag[i], 0.0));
            if i + 1 < m {
                h.set(i + 1, i, Scalar::new(self.offdiag[i], 0.0));
                h.set(i, i + 1, Scalar::new(self.offdiag[i], 0.0));
            }
        }
        h
    }
}

/// Incremental Hermitian Lanczos: three-term recurrence, two inner
/// products per step.
pub struct LanczosProcess<'a> {
    op: &'a LinearOperator,
    breakdown_tol: f64,
    v_prev: Option<Vec<Scalar>>,
    v_curr: Vec<Scalar>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    store_basis: bool,
    basis: Vec<Vec<Scalar>>,
    beta: f64,
    broke_down: bool,
}

impl<'a> LanczosProcess<'a> {
    pub fn new(op: &'a LinearOperator, start: &[Scalar], store_basis: bool) -> Result<Self> {
        if start.len() != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                got: start.len(),
            });
        }
        let beta = norm2(start);
        if beta == 0.0 {
            return Err(Error::ZeroStartVector);
        }
        let v1 = scale_vec(Complex64::new(1.0 / beta, 0.0), start);
        let basis = if store_basis {
            vec![v1.clone()]
        } else {
            Vec::new()
        };
        Ok(LanczosProcess {
            op,
            breakdown_tol: BREAKDOWN_REL * beta,
            v_prev: None,
            v_curr: v1,
            alphas: Vec::new(),
            betas: Vec::new(),
            store_basis,
            basis,
            beta,
            broke_down: false,
        })
    }

    pub fn steps(&self) -> usize {
        self.alphas.len()
    }

    pub fn broke_down(&self) -> bool {
        self.broke_down
    }

    /// The most recent basis vector `v_{steps+1}` (the next start of the
    /// recurrence). Used by the two-pass combination.
    pub fn current_vector(&self) -> &[Scalar] {
        &self.v_curr
    }

    /// The first `m` stored basis vectors, when the basis is kept.
    pub fn basis_prefix(&self, m: usize) -> Option<&[Vec<Scalar>]> {
        if self.store_basis && self.basis.len() >= m {
            Some(&self.basis[..m])
        } else {
            None
        }
    }

    pub fn step(&mut self) -> Result<bool> {
        if self.broke_down {
            return Ok(false);
        }
        let mut w = self.op.apply(&self.v_curr)?;
        let alpha = dot(&self.v_curr, &w).re;
        self.op.count_inner_products(1);
        axpy(Complex64::new(-alpha, 0.0), &self.v_curr, &mut w);
        if let Some(prev) = &self.v_prev {
            let b = *self.betas.last().unwrap();
            axpy(Complex64::new(-b, 0.0), prev, &mut w);
        }
        self.alphas.push(alpha);

        let bnext = norm2(&w);
        self.op.count_inner_products(1);
        if bnext <= self.breakdown_tol {
            self.broke_down = true;
            return Ok(false);
        }
        self.betas.push(bnext);
        let v_new = scale_vec(Complex64::new(1.0 / bnext, 0.0), &w);
        self.v_prev = Some(std::mem::replace(&mut self.v_curr, v_new));
        if self.store_basis {
            self.basis.push(self.v_curr.clone());
        }
        Ok(true)
    }

    /// `H_m` data after all completed steps.
    pub fn tridiag(&self, m: usize) -> (Vec<f64>, Vec<f64>) {
        assert!(m <= self.alphas.len());
        (
            self.alphas[..m].to_vec(),
            self.betas[..m.saturating_sub(1)].to_vec(),
        )
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn h_next(&self) -> f64 {
        if self.broke_down {
            0.0
        } else {
            self.betas.last().copied().unwrap_or(0.0)
        }
    }

    pub fn into_decomposition(mut self) -> TridiagDecomposition {
        let m = self.alphas.len();
        let h_next = self.h_next();
        let offdiag = self.betas[..m.saturating_sub(1)].to_vec();
        if self.store_basis {
            self.basis.truncate(m);
        }
        TridiagDecomposition {
            diag: self.alphas,
            offdiag,
            h_next,
            basis: if self.store_basis {
                Some(self.basis)
            } else {
                None
            },
            beta: self.beta,
        }
    }
}

/// Runs `m` Lanczos steps (fewer on breakdown). The operator must be
/// Hermitian; this is asserted by the caller, not checked.
pub fn lanczos(
    op: &LinearOperator,
    start: &[Scalar],
    m: usize,
    store_basis: bool,
) -> Result<TridiagDecomposition> {
    assert!(m >= 1);
    let mut proc = LanczosProcess::new(op, start, store_basis)?;
    for _ in 0..m {
        if !proc.step()? {
            break;
        }
    }
    Ok(proc.into_decomposition())
}

/// Second Lanczos pass: regenerates the basis vectors without storing them
/// and accumulates `sum_j coeffs[j] * v_j`. The pass mirrors the first one
/// step for step (m operator applications), so the mvm count doubles
/// exactly relative to a single basis-storing pass.
pub fn two_pass_lanczos_combine(
    op: &LinearOperator,
    start: &[Scalar],
    m: usize,
    coeffs: &[Scalar],
) -> Result<Vec<Scalar>> {
    assert_eq!(coeffs.len(), m, "coefficient vector must have length m");
    let mut proc = LanczosProcess::new(op, start, false)?;
    let mut acc = scale_vec(coeffs[0], proc.current_vector());
    for &c in coeffs.iter().take(m).skip(1) {
        if !proc.step()? {
            return Ok(acc);
        }
        axpy(c, proc.current_vector(), &mut acc);
    }
    // Closing application, as in the first pass (its product is not needed
    // for the combination).
    proc.step()?;
    Ok(acc)
}

/// Which Ritz extraction to perform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RitzKind {
    Standard,
    Harmonic,
}

/// Ritz (eigenvalues of `H_d`) or harmonic Ritz values (eigenvalues of
/// `H_d + h_{d+1,d}^2 H_d^{-*} e_d e_d^*`).
#[derive(Debug, Clone)]
pub struct RitzSet {
    pub values: Vec<Scalar>,
    pub kind: RitzKind,
    pub source_dim: usize,
}

pub fn ritz_values(dec: &ArnoldiDecomposition, kind: RitzKind) -> Result<RitzSet> {
    let d = dec.h.rows();
    let values = match kind {
        RitzKind::Standard => hessenberg_schur(&dec.h)?.eigenvalues(),
        RitzKind::Harmonic => {
            let mut e_d = vec![Scalar::new(0.0, 0.0); d];
            e_d[d - 1] = Scalar::new(1.0, 0.0);
            let g = lu_solve(&dec.h.adjoint(), &e_d).map_err(|e| match e {
                Error::SingularMatrix(_) => Error::SingularH,
                other => other,
            })?;
            let h2 = dec.h_next * dec.h_next;
            let mut ht = dec.h.clone();
            for i in 0..d {
                let cur = ht.get(i, d - 1);
                ht.set(i, d - 1, cur + Scalar::new(h2, 0.0) * g[i]);
            }
            hessenberg_schur(&ht)?.eigenvalues()
        }
    };
    Ok(RitzSet {
        values,
        kind,
        source_dim: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{
        make_laplace, rng::random_unit_vector, LaplaceFamily, LinearOperator, SparseMatrix,
    };
    use std::sync::Arc;

    fn plain(m: SparseMatrix) -> LinearOperator {
        LinearOperator::plain(Arc::new(m))
    }

    #[test]
    fn identity_breaks_down_at_step_one() {
        let op = plain(SparseMatrix::identity(5));
        let start = random_unit_vector(5, 3);
        let dec = arnoldi(&op, &start, 3, false).unwrap();
        assert_eq!(dec.steps(), 1);
        assert_eq!(dec.h_next, 0.0);
        assert!((dec.h.get(0, 0) - Scalar::new(1.0, 0.0)).norm() < 1e-14);
        assert!(dec.v_next.is_none());
    }

    #[test]
    fn zero_start_vector_rejected() {
        let op = plain(SparseMatrix::identity(3));
        let z = vec![Scalar::new(0.0, 0.0); 3];
        assert!(matches!(
            arnoldi(&op, &z, 2, false),
            Err(Error::ZeroStartVector)
        ));
    }

    #[test]
    fn full_dimension_recovers_spectrum() {
        let a = SparseMatrix::from_triplets(
            2,
            vec![(0, 0, Scalar::new(1.0, 0.0)), (1, 1, Scalar::new(2.0, 0.0))],
        )
        .unwrap();
        let op = plain(a);
        let s = 1.0 / 2.0_f64.sqrt();
        let start = vec![Scalar::new(s, 0.0), Scalar::new(s, 0.0)];
        let dec = arnoldi(&op, &start, 2, false).unwrap();
        let ritz = ritz_values(&dec, RitzKind::Standard).unwrap();
        let mut vals: Vec<f64> = ritz.values.iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn arnoldi_relation_residual_small() {
        let a = make_laplace(LaplaceFamily::D1, 50);
        let op = plain(a.clone());
        let start = random_unit_vector(50, 7);
        let dec = arnoldi(&op, &start, 10, false).unwrap();
        let m = dec.steps();
        assert_eq!(m, 10);

        // || A V - V H - h_next v_next e_m^T ||_F <= 1e-9 ||H||_F
        let mut frob = 0.0;
        for j in 0..m {
            let av = a.matvec(&dec.basis[j]);
            let mut resid = av;
            for i in 0..m {
                axpy(-dec.h.get(i, j), &dec.basis[i], &mut resid);
            }
            if j == m - 1 {
                if let Some(vn) = &dec.v_next {
                    axpy(Scalar::new(-dec.h_next, 0.0), vn, &mut resid);
                }
            }
            frob += resid.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        let frob = frob.sqrt();
        assert!(frob <= 1e-9 * dec.h.frobenius_norm(), "residual {frob:.3e}");
    }

    #[test]
    fn reorthogonalization_keeps_basis_orthonormal() {
        let a = make_laplace(LaplaceFamily::D3, 10);
        let op = plain(a);
        let start = random_unit_vector(1000, 11);
        let dec = arnoldi(&op, &start, 120, true).unwrap();
        let m = dec.steps();
        let mut max_off = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                let g = dot(&dec.basis[i], &dec.basis[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                max_off = max_off.max((g - Scalar::new(expect, 0.0)).norm());
            }
        }
        assert!(max_off <= 1e-10, "V*V deviation {max_off:.3e}");
    }

    #[test]
    fn inner_product_count_is_exact() {
        let a = make_laplace(LaplaceFamily::D1, 30);
        let op = plain(a);
        let start = random_unit_vector(30, 5);
        let m = 8;
        let _ = arnoldi(&op, &start, m, false).unwrap();
        // Step j costs j projections plus one norm.
        let expect: u64 = (1..=m as u64).map(|j| j + 1).sum();
        assert_eq!(op.inner_product_count(), expect);

        let op2 = plain(make_laplace(LaplaceFamily::D1, 30));
        let _ = arnoldi(&op2, &start, m, true).unwrap();
        let expect2: u64 = (1..=m as u64).map(|j| 2 * j + 1).sum();
        assert_eq!(op2.inner_product_count(), expect2);
    }

    #[test]
    fn lanczos_matches_arnoldi_for_hermitian() {
        let a = make_laplace(LaplaceFamily::D3, 10);
        let op = plain(a.clone());
        let start = random_unit_vector(1000, 13);
        let m = 30;
        let arn = arnoldi(&op, &start, m, true).unwrap();

        let op2 = plain(a);
        let lan = lanczos(&op2, &start, m, false).unwrap();
        assert_eq!(lan.steps(), m);
        // Arnoldi H should be symmetric tridiagonal for Hermitian input.
        assert!(arn.h.is_real_sym_tridiagonal(1e-10));
        for i in 0..m {
            assert!((arn.h.get(i, i).re - lan.diag[i]).abs() <= 1e-8, "diag {i}");
            if i + 1 < m {
                assert!(
                    (arn.h.get(i + 1, i).re - lan.offdiag[i]).abs() <= 1e-8,
                    "offdiag {i}"
                );
            }
        }
        // Two inner products per Lanczos step.
        assert_eq!(op2.inner_product_count(), 2 * m as u64);
    }

    #[test]
    fn lanczos_ritz_extremes_approach_spectrum_monotonically() {
        let a = make_laplace(LaplaceFamily::D1, 100);
        let op = plain(a);
        let start = random_unit_vector(100, 17);
        let mut prev_lo = f64::MAX;
        let mut prev_hi = f64::MIN;
        for m in [5, 10, 20, 30] {
            let op_fresh = LinearOperator::plain(Arc::new(make_laplace(LaplaceFamily::D1, 100)));
            let dec = lanczos(&op_fresh, &start, m, false).unwrap();
            let (vals, _) =
                crate::linalg::symmetric_tridiag_eigen(&dec.diag, &dec.offdiag).unwrap();
            let lo = vals[0];
            let hi = vals[vals.len() - 1];
            assert!(lo <= prev_lo + 1e-12, "min Ritz not decreasing at m={m}");
            assert!(hi >= prev_hi - 1e-12, "max Ritz not increasing at m={m}");
            prev_lo = lo;
            prev_hi = hi;
        }
        let _ = op;
    }

    #[test]
    fn two_pass_combination_matches_stored_basis() {
        let a = make_laplace(LaplaceFamily::D3, 5);
        let start = random_unit_vector(125, 19);
        let m = 12;

        let op1 = plain(a.clone());
        let one_pass = lanczos(&op1, &start, m, true).unwrap();
        let basis = one_pass.basis.as_ref().unwrap();
        let mut rngish = crate::operators::rng::SplitMix64::new(23);
        let coeffs: Vec<Scalar> = (0..m)
            .map(|_| Scalar::new(rngish.next_normal(), 0.0))
            .collect();
        let mut expect = vec![Scalar::new(0.0, 0.0); 125];
        for (c, v) in coeffs.iter().zip(basis.iter()) {
            axpy(*c, v, &mut expect);
        }
        let one_pass_mvms = op1.mvm_count();

        let op2 = plain(a);
        let _first = lanczos(&op2, &start, m, false).unwrap();
        let got = two_pass_lanczos_combine(&op2, &start, m, &coeffs).unwrap();
        let err = norm2(&crate::linalg::sub_vec(&got, &expect));
        assert!(
            err <= 1e-12 * norm2(&expect).max(1.0),
            "two-pass mismatch {err:.3e}"
        );
        assert_eq!(op2.mvm_count(), 2 * one_pass_mvms);
    }

    #[test]
    fn lanczos_identity_breaks_down_at_step_one() {
        let op = plain(SparseMatrix::identity(4));
        let start = random_unit_vector(4, 2);
        let dec = lanczos(&op, &start, 5, false).unwrap();
        assert_eq!(dec.steps(), 1);
        assert_eq!(dec.h_next, 0.0);
        assert!((dec.diag[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_pass_single_step_returns_scaled_start() {
        let op = plain(SparseMatrix::identity(4));
        let start = vec![
            Scalar::new(2.0, 0.0),
            Scalar::new(0.0, 0.0),
            Scalar::new(0.0, 0.0),
            Scalar::new(0.0, 0.0),
        ];
        let coeffs = vec![Scalar::new(3.0, 0.0)];
        let got = two_pass_lanczos_combine(&op, &start, 1, &coeffs).unwrap();
        assert!((got[0] - Scalar::new(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn harmonic_ritz_of_one_dimensional_space() {
        let a = SparseMatrix::from_triplets(
            3,
            vec![
                (0, 0, Scalar::new(5.0, 0.0)),
                (1, 1, Scalar::new(5.0, 0.0)),
                (2, 2, Scalar::new(5.0, 0.0)),
            ],
        )
        .unwrap();
        let op = plain(a);
        let start = random_unit_vector(3, 29);
        let dec = arnoldi(&op, &start, 2, false).unwrap();
        // Multiple of identity: breakdown at 1, h_next = 0, so harmonic ==
        // standard == {5}.
        assert_eq!(dec.steps(), 1);
        let std = ritz_values(&dec, RitzKind::Standard).unwrap();
        let har = ritz_values(&dec, RitzKind::Harmonic).unwrap();
        assert!((std.values[0] - Scalar::new(5.0, 0.0)).norm() < 1e-12);
        assert!((har.values[0] - Scalar::new(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ritz_values_stay_in_spectral_interval() {
        let a = make_laplace(LaplaceFamily::D2, 10);
        let op = plain(a);
        let start = random_unit_vector(100, 31);
        let dec = arnoldi(&op, &start, 8, false).unwrap();
        let ritz = ritz_values(&dec, RitzKind::Standard).unwrap();
        let (lo, hi) = crate::operators::laplace_extreme_eigenvalues(LaplaceFamily::D2, 10);
        for v in &ritz.values {
            assert!(v.im.abs() < 1e-10);
            assert!(
                v.re >= lo - 1e-10 && v.re <= hi + 1e-10,
                "Ritz {v} outside [{lo}, {hi}]"
            );
        }
    }

    #[test]
    fn harmonic_ritz_bounded_away_from_zero_for_normal_matrices() {
        // Small normal (diagonal) matrices: 1/|mu| <= max |z| over F(A^{-1})
        // = max 1/|lambda|, i.e. |mu| >= min |lambda|.
        let diag = [1.5, 2.0, 3.0, 4.5];
        let a = SparseMatrix::from_triplets(
            4,
            diag.iter()
                .enumerate()
                .map(|(i, &d)| (i, i, Scalar::new(d, 0.0)))
                .collect(),
        )
        .unwrap();
        let op = plain(a);
        let start = random_unit_vector(4, 37);
        let dec = arnoldi(&op, &start, 3, false).unwrap();
        let har = ritz_values(&dec, RitzKind::Harmonic).unwrap();
        let min_abs_lambda = 1.5;
        for mu in &har.values {
            assert!(
                mu.norm() >= min_abs_lambda - 1e-10,
                "harmonic Ritz {mu} inside the excluded disk"
            );
        }
    }
}
