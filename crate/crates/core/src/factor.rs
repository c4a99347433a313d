//! Low-rank regularized factorization of a set of symmetric PSD matrices.
//!
//! Each input matrix `C_k` is replaced by a rank-`S` factor `L_k` built from
//! its leading eigenpairs, so that `C_k ~ L_k L_k^T + (lambda - lambda0) I`
//! in the trace sense: the regularizer `lambda` absorbs, on average, the
//! spectrum that truncation discards.

use alloc::format;
use alloc::vec::Vec;

// In builds without `std`, f64 math methods resolve through this trait.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, SymmetricMatrix};
use crate::matrix::Matrix;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Relative tolerance for negative eigenvalues in the PSD check.
const PSD_TOL: f64 = 1e-8;

/// A set of `K` symmetric matrices sharing one dimension `N >= 2`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProblemSet {
    matrices: Vec<SymmetricMatrix>,
}

impl ProblemSet {
    pub fn new(matrices: Vec<SymmetricMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidInput(
                "problem set needs at least one matrix".into(),
            ));
        }
        let n = matrices[0].n();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "matrices must be at least 2x2, got {n}x{n}"
            )));
        }
        for (k, m) in matrices.iter().enumerate() {
            if m.n() != n {
                return Err(Error::InvalidInput(format!(
                    "matrix {k} is {}x{} but matrix 0 is {n}x{n}",
                    m.n(),
                    m.n()
                )));
            }
        }
        Ok(Self { matrices })
    }

    pub fn k(&self) -> usize {
        self.matrices.len()
    }

    pub fn n(&self) -> usize {
        self.matrices[0].n()
    }

    pub fn matrices(&self) -> &[SymmetricMatrix] {
        &self.matrices
    }
}

/// Default factor rank: `ceil(N / K)`, clamped to `[1, N]`.
pub fn default_rank(n: usize, k: usize) -> usize {
    let rank = n.div_ceil(k);
    rank.clamp(1, n)
}

/// Rank-`S` factors of a problem set plus the shared regularizer `lambda`.
#[derive(Debug, Clone)]
pub struct FactorSet {
    factors: Vec<Matrix>,
    n: usize,
    s: usize,
    lambda: f64,
}

impl FactorSet {
    pub fn k(&self) -> usize {
        self.factors.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Factor `L_k`, an `N x S` matrix.
    pub fn factor(&self, k: usize) -> &Matrix {
        &self.factors[k]
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }
}

/// Builds rank-`s` factors for every matrix in the set.
///
/// For each `C_k` the `s` leading eigenpairs `(w_j, v_j)` give the factor
/// columns `v_j * sqrt(max(w_j, 0))`. The regularizer starts at `lambda0`
/// and gains the average truncated spectrum mass,
/// `sum_k (trace C_k - sum_{j < s} w_j) / (N K)`, accumulated in index order.
///
/// Fails with [`Error::NotPsd`] if any matrix has an eigenvalue below
/// `-1e-8` relative to its largest one.
pub fn build_factors(problem: &ProblemSet, s: usize, lambda0: f64) -> Result<FactorSet> {
    let n = problem.n();
    let k = problem.k();
    if s == 0 || s > n {
        return Err(Error::InvalidInput(format!(
            "factor rank must be in 1..={n}, got {s}"
        )));
    }
    if !(lambda0 > 0.0) || !lambda0.is_finite() {
        return Err(Error::InvalidInput(format!(
            "regularizer floor must be positive and finite, got {lambda0}"
        )));
    }

    let spectra = decompose_all(problem)?;

    let mut factors = Vec::with_capacity(k);
    let mut deficit_sum = 0.0;
    for (idx, (eigenvalues, vectors)) in spectra.into_iter().enumerate() {
        let floor = -PSD_TOL * eigenvalues[0].max(0.0);
        let smallest = eigenvalues[n - 1];
        if smallest < floor {
            return Err(Error::NotPsd {
                index: idx,
                eigenvalue: smallest,
            });
        }

        let mut factor = Matrix::zeros(n, s);
        for j in 0..s {
            let scale = eigenvalues[j].max(0.0).sqrt();
            for r in 0..n {
                factor[(r, j)] = vectors[(r, j)] * scale;
            }
        }
        factors.push(factor);

        let truncated: f64 = eigenvalues[s..].iter().sum();
        deficit_sum += truncated;
    }

    let lambda = lambda0 + deficit_sum / (n as f64 * k as f64);
    Ok(FactorSet {
        factors,
        n,
        s,
        lambda,
    })
}

/// Eigendecomposes every matrix; per-matrix work may run in parallel, with
/// results kept in input order.
fn decompose_all(problem: &ProblemSet) -> Result<Vec<(Vec<f64>, Matrix)>> {
    #[cfg(feature = "parallel")]
    {
        problem.matrices().par_iter().map(sym_eig).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        problem.matrices().iter().map(sym_eig).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sym(n: usize, v: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::new(Matrix::from_vec(n, n, v.to_vec()).unwrap()).unwrap()
    }

    fn diag(values: &[f64]) -> SymmetricMatrix {
        let n = values.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        SymmetricMatrix::new(m).unwrap()
    }

    #[test]
    fn default_rank_rounds_up_and_clamps() {
        assert_eq!(default_rank(100, 10), 10);
        assert_eq!(default_rank(10, 3), 4);
        assert_eq!(default_rank(5, 10), 1);
        assert_eq!(default_rank(7, 1), 7);
    }

    #[test]
    fn problem_set_rejects_mixed_dimensions() {
        let a = diag(&[1.0, 2.0]);
        let b = diag(&[1.0, 2.0, 3.0]);
        assert!(ProblemSet::new(vec![a, b]).is_err());
    }

    #[test]
    fn problem_set_rejects_empty_and_tiny() {
        assert!(ProblemSet::new(vec![]).is_err());
        let one = SymmetricMatrix::new(Matrix::from_vec(1, 1, vec![2.0]).unwrap()).unwrap();
        assert!(ProblemSet::new(vec![one]).is_err());
    }

    #[test]
    fn full_rank_identity_keeps_lambda_at_floor() {
        let problem = ProblemSet::new(vec![diag(&[1.0; 4])]).unwrap();
        let f = build_factors(&problem, 4, 1.0).unwrap();
        assert_eq!(f.lambda(), 1.0);
        // L L^T must rebuild the identity.
        let gram = f.factor(0).matmul_nt(f.factor(0));
        assert!(gram.max_abs_diff(&Matrix::identity(4)) < 1e-12);
    }

    #[test]
    fn truncated_identity_absorbs_deficit_into_lambda() {
        // I4 at rank 2 discards two unit eigenvalues: lambda = 1 + 2 / 4.
        let problem = ProblemSet::new(vec![diag(&[1.0; 4])]).unwrap();
        let f = build_factors(&problem, 2, 1.0).unwrap();
        assert!((f.lambda() - 1.5).abs() < 1e-14);
        assert_eq!(f.factor(0).cols(), 2);
    }

    #[test]
    fn full_rank_factor_reconstructs_dense_matrix() {
        let m = sym(3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let problem = ProblemSet::new(vec![m.clone()]).unwrap();
        let f = build_factors(&problem, 3, 1.0).unwrap();
        let rebuilt = f.factor(0).matmul_nt(f.factor(0));
        let tol = 1e-8 * m.as_matrix().max_abs();
        assert!(rebuilt.max_abs_diff(m.as_matrix()) < tol);
        assert_eq!(f.lambda(), 1.0);
    }

    #[test]
    fn lambda_matches_trace_deficit_oracle() {
        // Rank 1 of diag(5, 3, 2) truncates 3 + 2; diag(4, 1, 1) truncates
        // 1 + 1. lambda = 1 + (5 + 2) / (3 * 2).
        let problem =
            ProblemSet::new(vec![diag(&[5.0, 3.0, 2.0]), diag(&[4.0, 1.0, 1.0])]).unwrap();
        let f = build_factors(&problem, 1, 1.0).unwrap();
        assert!((f.lambda() - (1.0 + 7.0 / 6.0)).abs() < 1e-14);
    }

    #[test]
    fn lambda_is_rotation_invariant() {
        use crate::linalg::{expm_skew, StrictLower};
        let base = diag(&[6.0, 2.0, 1.0, 0.5]);
        let mut gen = StrictLower::zeros(4);
        for (i, v) in gen.values_mut().iter_mut().enumerate() {
            *v = 0.2 * (i as f64 + 1.0);
        }
        let q = expm_skew(&gen, 1.0).unwrap();
        let rotated = q
            .as_matrix()
            .matmul(base.as_matrix())
            .matmul_nt(q.as_matrix());
        let rotated = SymmetricMatrix::new(rotated).unwrap();

        let f_base = build_factors(&ProblemSet::new(vec![base]).unwrap(), 2, 1.0).unwrap();
        let f_rot = build_factors(&ProblemSet::new(vec![rotated]).unwrap(), 2, 1.0).unwrap();
        assert!((f_base.lambda() - f_rot.lambda()).abs() < 1e-12);
    }

    #[test]
    fn leading_factor_column_carries_largest_eigenvalue() {
        let problem = ProblemSet::new(vec![diag(&[2.0, 9.0, 4.0])]).unwrap();
        let f = build_factors(&problem, 2, 1.0).unwrap();
        let l = f.factor(0);
        // First column is the eigenvector of 9 scaled by 3.
        assert!((l[(1, 0)] - 3.0).abs() < 1e-12);
        assert!((l[(2, 1)] - 2.0).abs() < 1e-12);
        assert!((f.lambda() - (1.0 + 2.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite_matrix_naming_its_index() {
        let good = diag(&[1.0, 2.0]);
        let bad = diag(&[1.0, -1.0]);
        let problem = ProblemSet::new(vec![good, bad]).unwrap();
        match build_factors(&problem, 2, 1.0) {
            Err(Error::NotPsd { index, eigenvalue }) => {
                assert_eq!(index, 1);
                assert!((eigenvalue + 1.0).abs() < 1e-12);
            }
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn tolerates_tiny_negative_eigenvalues() {
        let problem = ProblemSet::new(vec![diag(&[1.0, -1e-12])]).unwrap();
        let f = build_factors(&problem, 1, 1.0).unwrap();
        // The clamped truncated tail still enters lambda as drawn.
        assert!(f.lambda() <= 1.0);
        assert!(f.lambda() > 1.0 - 1e-12);
    }

    #[test]
    fn rejects_out_of_range_rank_and_regularizer() {
        let problem = ProblemSet::new(vec![diag(&[1.0, 1.0])]).unwrap();
        assert!(build_factors(&problem, 0, 1.0).is_err());
        assert!(build_factors(&problem, 3, 1.0).is_err());
        assert!(build_factors(&problem, 2, 0.0).is_err());
        assert!(build_factors(&problem, 2, f64::NAN).is_err());
    }
}
