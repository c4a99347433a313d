//! Golden-section line search along a linearized rotation path.
//!
//! The full step is `R* = exp(E - E^T)`. Instead of exponentiating for every
//! trial step size, candidates blend the current factors with the fully
//! rotated ones, `A(alpha) = (1 - alpha) A + alpha R* A`, which matches the
//! rotation path to first order. The winning blend weight is mapped back to
//! an exponential scale before the real update is taken.

// In builds without `std`, f64 math methods resolve through this trait.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;
use crate::linalg::{expm_skew, RotationMatrix, StrictLower};
use crate::matrix::Matrix;
use crate::solver::{SolverConfig, SolverState, ACCEPT_TOL};

/// `(sqrt 5 - 1) / 2`, the interval shrink factor of golden-section search.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of one line search.
#[derive(Debug, Clone)]
pub enum LineSearchOutcome {
    /// A step that does not increase the loss (within [`ACCEPT_TOL`]).
    Accepted {
        /// Exponential scale actually applied.
        alpha_star: f64,
        /// Rotation `exp(alpha_star (E - E^T))`.
        rotation: RotationMatrix,
        /// Rotated stacked factors.
        a: Matrix,
        /// Row norms matching `a`.
        d: Matrix,
        /// Loss at the new point.
        loss: f64,
    },
    /// Every candidate increased the loss; the iterate must not move.
    Rejected,
}

/// Maps a blend weight on the linear path to an exponential scale: the
/// rotation `exp(alpha_star (E - E^T))` moves as far along the group as the
/// blend `alpha` moves along the chord. Fixed points: 0 and 1.
pub(crate) fn exponential_scale_alpha(alpha: f64) -> f64 {
    (alpha * (core::f64::consts::E - 1.0)).ln_1p()
}

/// Searches the blended path for a loss-reducing step.
pub fn line_search(
    state: &SolverState,
    e: &StrictLower,
    config: &SolverConfig,
) -> Result<LineSearchOutcome> {
    let f0 = state.loss();
    let full_rotation = expm_skew(e, 1.0)?;
    let rotated = full_rotation.as_matrix().matmul(&state.a);

    let eval = |alpha: f64| blended_loss(&state.a, &rotated, alpha, state.k, state.s, state.lambda);

    // The full step is evaluated first, so a perfectly flat profile keeps
    // alpha = 1 and reuses the exponential already in hand.
    let mut evals = 1;
    let mut best_alpha = 1.0;
    let mut best_f = eval(1.0);

    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    evals += 2;
    if f1 < best_f {
        best_f = f1;
        best_alpha = x1;
    }
    if f2 < best_f {
        best_f = f2;
        best_alpha = x2;
    }

    while hi - lo > config.line_search_tol && evals < config.line_search_evals {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = eval(x1);
            if f1 < best_f {
                best_f = f1;
                best_alpha = x1;
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = eval(x2);
            if f2 < best_f {
                best_f = f2;
                best_alpha = x2;
            }
        }
        evals += 1;
    }

    if !(best_f <= f0 + ACCEPT_TOL) {
        return Ok(LineSearchOutcome::Rejected);
    }

    // Realize the chosen candidate on the rotation group. The full step
    // reuses the exponential already computed; fractional steps need one
    // more exponential at the mapped scale.
    let (alpha_star, rotation, a) = if best_alpha == 1.0 {
        (1.0, full_rotation, rotated)
    } else {
        let alpha_star = exponential_scale_alpha(best_alpha);
        let rotation = expm_skew(e, alpha_star)?;
        let a = rotation.as_matrix().matmul(&state.a);
        (alpha_star, rotation, a)
    };

    let d = crate::solver::compute_d(&a, state.k, state.s, state.lambda);
    let loss = crate::solver::loss_from_d(&d);
    if loss <= f0 + ACCEPT_TOL {
        Ok(LineSearchOutcome::Accepted {
            alpha_star,
            rotation,
            a,
            d,
            loss,
        })
    } else {
        Ok(LineSearchOutcome::Rejected)
    }
}

/// Loss of `(1 - alpha) a + alpha rotated` without materializing the blend.
fn blended_loss(a: &Matrix, rotated: &Matrix, alpha: f64, k: usize, s: usize, lambda: f64) -> f64 {
    let n = a.rows();
    let keep = 1.0 - alpha;
    let mut sum = 0.0;
    for i in 0..n {
        let base = a.row(i);
        let rot = rotated.row(i);
        for block in 0..k {
            let lo = block * s;
            let hi = lo + s;
            let mut sumsq = lambda;
            for (&x, &y) in base[lo..hi].iter().zip(&rot[lo..hi]) {
                let v = keep * x + alpha * y;
                sumsq += v * v;
            }
            sum += sumsq.ln();
        }
    }
    sum / (2.0 * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::compute_d;
    use alloc::vec::Vec;

    #[test]
    fn scale_map_fixes_endpoints_exactly() {
        assert_eq!(exponential_scale_alpha(0.0), 0.0);
        assert_eq!(exponential_scale_alpha(1.0), 1.0);
    }

    #[test]
    fn scale_map_midpoint_value() {
        assert!((exponential_scale_alpha(0.5) - 0.620115).abs() < 1e-6);
    }

    #[test]
    fn scale_map_is_concave_increasing() {
        let mut prev = 0.0;
        for i in 1..=10 {
            let alpha = i as f64 / 10.0;
            let mapped = exponential_scale_alpha(alpha);
            assert!(mapped > prev);
            assert!(mapped >= alpha - 1e-15);
            prev = mapped;
        }
    }

    fn tilted_state() -> SolverState {
        // K = 1, S = N = 2 factors with correlated rows; rotating can
        // decrease the loss.
        let a = Matrix::from_vec(2, 2, [2.0, 0.0, 1.5, 1.0].to_vec()).unwrap();
        let d = compute_d(&a, 1, 2, 1.0);
        SolverState {
            b: Matrix::identity(2),
            a,
            d,
            lambda: 1.0,
            n: 2,
            k: 1,
            s: 2,
            t: 0,
            loss_history: Vec::new(),
            grad_rmsd_history: Vec::new(),
        }
    }

    #[test]
    fn descent_direction_is_accepted_and_reduces_loss() {
        let state = tilted_state();
        let g = crate::solver::gradient(&state);
        let h = crate::solver::hessian_diag(&state.d, 1e-2);
        let e = crate::solver::newton_direction(&g, &h);
        let config = SolverConfig::default();
        match line_search(&state, &e, &config).unwrap() {
            LineSearchOutcome::Accepted {
                alpha_star, loss, ..
            } => {
                assert!(loss < state.loss());
                assert!(alpha_star > 0.0 && alpha_star <= 1.0);
            }
            LineSearchOutcome::Rejected => panic!("descent step was rejected"),
        }
    }

    #[test]
    fn step_away_from_exact_minimum_is_rejected() {
        // A A^T = diag(4, 1) is already diagonal, so every true rotation
        // increases the canonical loss. The blended profile still dips
        // below it (blending shrinks the factors), which makes the final
        // recomputed-loss gate the one that must reject.
        let a = Matrix::from_vec(2, 2, [2.0, 0.0, 0.0, 1.0].to_vec()).unwrap();
        let d = compute_d(&a, 1, 2, 1.0);
        let state = SolverState {
            b: Matrix::identity(2),
            a,
            d,
            lambda: 1.0,
            n: 2,
            k: 1,
            s: 2,
            t: 0,
            loss_history: Vec::new(),
            grad_rmsd_history: Vec::new(),
        };
        let mut e = StrictLower::zeros(2);
        e.set(1, 0, 0.1);
        let config = SolverConfig::default();
        assert!(matches!(
            line_search(&state, &e, &config).unwrap(),
            LineSearchOutcome::Rejected
        ));
    }

    #[test]
    fn zero_direction_keeps_loss_and_accepts_full_identity_step() {
        let state = tilted_state();
        let e = StrictLower::zeros(2);
        let config = SolverConfig::default();
        match line_search(&state, &e, &config).unwrap() {
            LineSearchOutcome::Accepted {
                alpha_star,
                rotation,
                loss,
                ..
            } => {
                // A flat profile keeps the first candidate, the full step,
                // whose rotation is exactly the identity.
                assert_eq!(alpha_star, 1.0);
                assert_eq!(rotation.as_matrix(), &Matrix::identity(2));
                assert!((loss - state.loss()).abs() <= 1e-15);
            }
            LineSearchOutcome::Rejected => panic!("flat profile must be acceptable"),
        }
    }

    #[test]
    fn blended_loss_endpoints_match_exact_losses() {
        let state = tilted_state();
        let e = {
            let mut e = StrictLower::zeros(2);
            e.set(1, 0, 0.3);
            e
        };
        let r = expm_skew(&e, 1.0).unwrap();
        let rotated = r.as_matrix().matmul(&state.a);

        let at0 = blended_loss(&state.a, &rotated, 0.0, 1, 2, 1.0);
        assert!((at0 - state.loss()).abs() < 1e-15);

        let d1 = compute_d(&rotated, 1, 2, 1.0);
        let at1 = blended_loss(&state.a, &rotated, 1.0, 1, 2, 1.0);
        assert!((at1 - crate::solver::loss_from_d(&d1)).abs() < 1e-15);
    }

    #[test]
    fn eval_budget_is_respected() {
        // A tiny budget still yields a decision (three seed evaluations).
        let state = tilted_state();
        let g = crate::solver::gradient(&state);
        let h = crate::solver::hessian_diag(&state.d, 1e-2);
        let e = crate::solver::newton_direction(&g, &h);
        let config = SolverConfig {
            line_search_evals: 3,
            ..SolverConfig::default()
        };
        assert!(line_search(&state, &e, &config).is_ok());
    }
}
