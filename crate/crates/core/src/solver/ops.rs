//! Loss, gradient, curvature, and step direction for the rotation iterate.

use alloc::vec::Vec;

// In builds without `std`, f64 math methods resolve through this trait.
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::StrictLower;
use crate::matrix::{dot, Matrix};
use crate::solver::SolverState;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Regularized squared row norms of the stacked factors.
///
/// Entry `(k, i)` of the result is `lambda + sum_j a[i][k s + j]^2`, i.e.
/// the `i`-th diagonal entry of `A_k A_k^T + lambda I`.
pub fn compute_d(a: &Matrix, k: usize, s: usize, lambda: f64) -> Matrix {
    let n = a.rows();
    debug_assert_eq!(a.cols(), k * s);
    let mut d = Matrix::zeros(k, n);
    for i in 0..n {
        let row = a.row(i);
        for block in 0..k {
            let seg = &row[block * s..(block + 1) * s];
            let sumsq: f64 = seg.iter().map(|&x| x * x).sum();
            d[(block, i)] = lambda + sumsq;
        }
    }
    d
}

/// Loss implied by cached row norms: `(1 / 2K) * sum_{k,i} ln d[k][i]`.
pub fn loss_from_d(d: &Matrix) -> f64 {
    let k = d.rows();
    let sum: f64 = d.data().iter().map(|&v| v.ln()).sum();
    sum / (2.0 * k as f64)
}

/// Gradient of the loss with respect to the rotation generator.
///
/// `G[l][m] = (1 / K) * sum_k (1 / d[k][l] - 1 / d[k][m]) * (A_k A_k^T)[l][m]`
/// for `l > m`; the strict lower triangle determines the full skew gradient.
pub fn gradient(state: &SolverState) -> StrictLower {
    gradient_parts(&state.a, &state.d, state.k, state.s)
}

pub(crate) fn gradient_parts(a: &Matrix, d: &Matrix, k: usize, s: usize) -> StrictLower {
    let n = a.rows();
    let mut inv_d = d.clone();
    for v in inv_d.data_mut() {
        *v = 1.0 / *v;
    }

    let per_block = |block: usize| -> StrictLower {
        let mut g = StrictLower::zeros(n);
        let inv = inv_d.row(block);
        let lo = block * s;
        let hi = lo + s;
        let gv = g.values_mut();
        for l in 1..n {
            let al = &a.row(l)[lo..hi];
            let inv_l = inv[l];
            let grow = &mut gv[l * (l - 1) / 2..l * (l + 1) / 2];
            for (m, gm) in grow.iter_mut().enumerate() {
                let am = &a.row(m)[lo..hi];
                *gm = (inv_l - inv[m]) * dot(al, am);
            }
        }
        g
    };

    #[cfg(feature = "parallel")]
    let parts: Vec<StrictLower> = (0..k).into_par_iter().map(per_block).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<StrictLower> = (0..k).map(per_block).collect();

    let mut g = StrictLower::zeros(n);
    for part in &parts {
        g.add_assign(part);
    }
    g.scale(1.0 / k as f64);
    g
}

/// Unclamped diagonal curvature estimate of the loss.
///
/// `H[l][m] = (1 / K) * sum_k (d[k][m] / d[k][l] + d[k][l] / d[k][m] - 2)`,
/// which is nonnegative and vanishes only where all row-norm pairs agree.
pub fn hessian_diag_raw(d: &Matrix) -> StrictLower {
    let k = d.rows();
    let n = d.cols();
    let mut h = StrictLower::zeros(n);
    let hv = h.values_mut();
    for block in 0..k {
        let drow = d.row(block);
        for l in 1..n {
            let dl = drow[l];
            let hrow = &mut hv[l * (l - 1) / 2..l * (l + 1) / 2];
            for (m, hm) in hrow.iter_mut().enumerate() {
                let dm = drow[m];
                *hm += dm / dl + dl / dm - 2.0;
            }
        }
    }
    h.scale(1.0 / k as f64);
    h
}

/// Diagonal curvature with every entry clamped up to `floor`.
pub fn hessian_diag(d: &Matrix, floor: f64) -> StrictLower {
    let mut h = hessian_diag_raw(d);
    for v in h.values_mut() {
        *v = v.max(floor);
    }
    h
}

/// Quasi-Newton step `E = -G / H`, elementwise over the strict lower
/// triangle; `h` must already be clamped away from zero.
pub fn newton_direction(g: &StrictLower, h: &StrictLower) -> StrictLower {
    assert_eq!(g.n(), h.n());
    let mut e = g.clone();
    for (ev, &hv) in e.values_mut().iter_mut().zip(h.values()) {
        *ev = -*ev / hv;
    }
    e
}

/// Root mean square of the gradient entries over all `N (N - 1) / 2` pairs.
pub fn grad_rmsd(g: &StrictLower) -> f64 {
    g.rms()
}
