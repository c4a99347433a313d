//! Symmetric eigendecomposition via the cyclic Jacobi method.

use alloc::vec::Vec;

// In builds without `std`, f64 math methods resolve through this trait.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;
use crate::matrix::Matrix;

const MAX_SWEEPS: usize = 64;

/// Full eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues in descending order and the matrix whose columns are
/// the matching orthonormal eigenvectors, so `M = V diag(w) V^T`. Each
/// eigenvector is oriented so its largest-magnitude entry is positive; ties
/// resolve to the earliest such entry, which keeps the output deterministic.
pub fn sym_eig(m: &SymmetricMatrix) -> Result<(Vec<f64>, Matrix)> {
    let n = m.n();
    let mut a = m.as_matrix().clone();
    let mut v = Matrix::identity(n);

    let scale = a.max_abs();
    if scale > 0.0 {
        let tol = 1e-15 * scale;
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            if jacobi_sweep(&mut a, &mut v, tol) == 0 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
        }
    }

    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    sort_descending(&mut eigenvalues, &mut v);
    orient_columns(&mut v);
    Ok((eigenvalues, v))
}

/// One cyclic pass over all index pairs; returns the number of rotations.
fn jacobi_sweep(a: &mut Matrix, v: &mut Matrix, tol: f64) -> usize {
    let n = a.rows();
    let mut rotations = 0;

    for p in 0..n {
        for q in p + 1..n {
            let apq = a[(p, q)];
            if apq.abs() <= tol {
                continue;
            }
            rotations += 1;

            let app = a[(p, p)];
            let aqq = a[(q, q)];
            let tau = (aqq - app) / (2.0 * apq);
            let t = if tau >= 0.0 {
                1.0 / (tau + (1.0 + tau * tau).sqrt())
            } else {
                1.0 / (tau - (1.0 + tau * tau).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;

            for r in 0..n {
                if r == p || r == q {
                    continue;
                }
                let arp = a[(r, p)];
                let arq = a[(r, q)];
                let new_p = c * arp - s * arq;
                let new_q = s * arp + c * arq;
                a[(r, p)] = new_p;
                a[(p, r)] = new_p;
                a[(r, q)] = new_q;
                a[(q, r)] = new_q;
            }
            a[(p, p)] = app - t * apq;
            a[(q, q)] = aqq + t * apq;
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;

            for r in 0..n {
                let vrp = v[(r, p)];
                let vrq = v[(r, q)];
                v[(r, p)] = c * vrp - s * vrq;
                v[(r, q)] = s * vrp + c * vrq;
            }
        }
    }

    rotations
}

/// Sorts eigenvalues descending and permutes eigenvector columns to match.
fn sort_descending(eigenvalues: &mut [f64], v: &mut Matrix) {
    let n = eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eigenvalues[j].total_cmp(&eigenvalues[i]).then(i.cmp(&j)));

    let sorted: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    eigenvalues.copy_from_slice(&sorted);

    let mut permuted = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            permuted[(r, new_col)] = v[(r, old_col)];
        }
    }
    *v = permuted;
}

/// Flips each column so its largest-magnitude entry is positive.
fn orient_columns(v: &mut Matrix) {
    let n = v.rows();
    for col in 0..n {
        let mut best_row = 0;
        let mut best_abs = 0.0;
        for r in 0..n {
            let mag = v[(r, col)].abs();
            if mag > best_abs {
                best_abs = mag;
                best_row = r;
            }
        }
        if v[(best_row, col)] < 0.0 {
            for r in 0..n {
                v[(r, col)] = -v[(r, col)];
            }
        }
    }
}
