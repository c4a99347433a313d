//! Diagonalization quality measures computed from dense transforms.

use alloc::format;
use alloc::vec::Vec;

// In builds without `std`, f64 math methods resolve through this trait.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::factor::ProblemSet;
use crate::matrix::{cholesky_logdet, Matrix};

/// Quality summary of a diagonalizer against a problem set.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsReport {
    /// RMSD of off-diagonal entries pooled over all matrices.
    pub offdiag_rmsd: f64,
    /// RMSD of off-diagonal entries per matrix, in input order.
    pub per_matrix_offdiag_rmsd: Vec<f64>,
    /// Log-ratio criterion with uniform weights `1 / K`; `None` when a
    /// transformed matrix is numerically singular or has a non-positive
    /// diagonal entry.
    pub mean_log_ratio: Option<f64>,
    /// Largest absolute entry of `B B^T - I`.
    pub orthonormality_error: f64,
}

fn check_shapes(b: &Matrix, problem: &ProblemSet) -> Result<()> {
    if !b.is_square() || b.rows() != problem.n() {
        return Err(Error::InvalidInput(format!(
            "diagonalizer is {}x{} but the problem is {n}x{n}",
            b.rows(),
            b.cols(),
            n = problem.n()
        )));
    }
    if !b.is_finite() {
        return Err(Error::NonFinite("diagonalizer entries".into()));
    }
    Ok(())
}

/// Transformed matrix `B C_k B^T`.
fn transformed(b: &Matrix, problem: &ProblemSet, k: usize) -> Matrix {
    b.matmul(problem.matrices()[k].as_matrix()).matmul_nt(b)
}

/// Off-diagonal root mean square deviation from zero.
///
/// Returns the pooled value over all `K N (N - 1)` off-diagonal entries and
/// the per-matrix values. Both are RMS distances of `B C_k B^T` from
/// diagonality, in the units of the input matrices.
pub fn offdiag_rmsd(b: &Matrix, problem: &ProblemSet) -> Result<(f64, Vec<f64>)> {
    check_shapes(b, problem)?;
    let n = problem.n();
    let k = problem.k();
    let per_matrix_count = (n * (n - 1)) as f64;

    let mut pooled = 0.0;
    let mut per_matrix = Vec::with_capacity(k);
    for idx in 0..k {
        let m = transformed(b, problem, idx);
        let mut sumsq = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sumsq += m[(i, j)] * m[(i, j)];
                }
            }
        }
        per_matrix.push((sumsq / per_matrix_count).sqrt());
        pooled += sumsq;
    }
    Ok(((pooled / (k as f64 * per_matrix_count)).sqrt(), per_matrix))
}

/// Weighted log-ratio criterion of diagonality.
///
/// `(1/2) sum_k w_k (log det diag(B C_k B^T) - log det(B C_k B^T))`, which
/// is nonnegative for positive definite transforms and zero exactly at
/// joint diagonality. Returns `None` when any transform has a non-positive
/// diagonal entry or fails its Cholesky factorization.
pub fn criterion_loss(b: &Matrix, problem: &ProblemSet, weights: &[f64]) -> Result<Option<f64>> {
    check_shapes(b, problem)?;
    if weights.len() != problem.k() {
        return Err(Error::InvalidInput(format!(
            "{} weights supplied for {} matrices",
            weights.len(),
            problem.k()
        )));
    }
    if !weights.iter().all(|w| w.is_finite() && *w > 0.0) {
        return Err(Error::InvalidInput(
            "weights must be positive and finite".into(),
        ));
    }

    let n = problem.n();
    let mut total = 0.0;
    for (idx, &w) in weights.iter().enumerate() {
        let m = transformed(b, problem, idx);
        let mut logdet_diag = 0.0;
        for i in 0..n {
            let diag = m[(i, i)];
            if !(diag > 0.0) {
                return Ok(None);
            }
            logdet_diag += diag.ln();
        }
        let Some(logdet) = cholesky_logdet(&m) else {
            return Ok(None);
        };
        total += w * (logdet_diag - logdet);
    }
    Ok(Some(0.5 * total))
}

/// Log-ratio criterion with uniform weights `1 / K`.
pub fn mean_log_ratio(b: &Matrix, problem: &ProblemSet) -> Result<Option<f64>> {
    let w = alloc::vec![1.0 / problem.k() as f64; problem.k()];
    criterion_loss(b, problem, &w)
}

/// Computes the full diagnostics bundle for a candidate diagonalizer.
///
/// The diagonalizer does not have to be orthonormal; its deviation is
/// reported rather than enforced.
pub fn diagnostics(b: &Matrix, problem: &ProblemSet) -> Result<DiagnosticsReport> {
    let (pooled, per_matrix) = offdiag_rmsd(b, problem)?;
    let mean_log = mean_log_ratio(b, problem)?;
    let orthonormality_error = b.matmul_nt(b).max_abs_diff(&Matrix::identity(b.rows()));
    Ok(DiagnosticsReport {
        offdiag_rmsd: pooled,
        per_matrix_offdiag_rmsd: per_matrix,
        mean_log_ratio: mean_log,
        orthonormality_error,
    })
}
