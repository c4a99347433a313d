//! Quasi-Newton joint diagonalization under orthonormality constraints.
//!
//! The solver maintains a rotation `B` and the rotated factors `A_k = B L_k`
//! and minimizes the average log ratio between the diagonal of the implied
//! transformed matrices and their determinant-bearing row norms:
//!
//! `loss = (1 / 2K) * sum_k sum_i log(lambda + sum_j A_k[i][j]^2)`
//!
//! Each iteration takes a diagonal-Hessian Newton step in the tangent space
//! of the rotation group, mapped back through the matrix exponential, with a
//! golden-section line search along a linearized path.

mod line_search;
mod ops;

pub use line_search::{line_search, LineSearchOutcome};
pub use ops::{
    compute_d, grad_rmsd, gradient, hessian_diag, hessian_diag_raw, loss_from_d, newton_direction,
};

use alloc::format;
use alloc::vec::Vec;

use crate::clock::Clock;
#[cfg(feature = "std")]
use crate::clock::WallClock;
use crate::error::{Error, Result};
use crate::factor::FactorSet;
use crate::matrix::Matrix;
use crate::report::{RunReport, SolveStatus, SolveTimings};

/// Loss increase tolerated when accepting a line-search step.
pub(crate) const ACCEPT_TOL: f64 = 1e-12;

/// Gradient RMSD multiple below which a stalled line search ends the run.
const STALL_RMSD_FACTOR: f64 = 10.0;

/// Tuning knobs for [`solve`]; `Default` gives the reference settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverConfig {
    /// Factor rank; `None` selects `ceil(N / K)`.
    pub rank: Option<usize>,
    /// Floor of the shared regularizer.
    pub lambda0: f64,
    /// Gradient RMSD threshold for convergence.
    pub tol: f64,
    /// Floor applied to the diagonal curvature estimate.
    pub curvature_floor: f64,
    /// Iteration budget.
    pub max_iter: usize,
    /// Iterations that must complete before convergence can be declared.
    pub min_iter: usize,
    /// Budget of loss evaluations per line search.
    pub line_search_evals: usize,
    /// Interval width at which the line search stops shrinking.
    pub line_search_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rank: None,
            lambda0: 1.0,
            tol: 1e-4,
            curvature_floor: 1e-2,
            max_iter: 100,
            min_iter: 10,
            line_search_evals: 20,
            line_search_tol: 1e-2,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 > 0.0) || !self.lambda0.is_finite() {
            return Err(Error::InvalidInput(format!(
                "lambda0 must be positive and finite, got {}",
                self.lambda0
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if !(self.curvature_floor > 0.0) {
            return Err(Error::InvalidInput(format!(
                "curvature floor must be positive, got {}",
                self.curvature_floor
            )));
        }
        if self.min_iter > self.max_iter {
            return Err(Error::InvalidInput(format!(
                "min_iter {} exceeds max_iter {}",
                self.min_iter, self.max_iter
            )));
        }
        if self.line_search_evals < 3 {
            return Err(Error::InvalidInput(format!(
                "line search needs at least 3 evaluations, got {}",
                self.line_search_evals
            )));
        }
        if !(self.line_search_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "line search tolerance must be positive, got {}",
                self.line_search_tol
            )));
        }
        if let Some(rank) = self.rank {
            if rank == 0 {
                return Err(Error::InvalidInput("rank must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Mutable state of one solve.
///
/// Invariants kept by the update loop: `b` stays orthonormal, `a` always
/// equals `b` applied to the stacked factors, and `d` matches `a`.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Current diagonalizer, `N x N`.
    pub b: Matrix,
    /// Rotated factors stacked column-wise: `N x (K S)`, block `k` in
    /// columns `k S .. (k + 1) S`.
    pub a: Matrix,
    /// Regularized squared row norms per matrix: `K x N`, entry `(k, i)` is
    /// `lambda + sum_j a[i][k S + j]^2`.
    pub d: Matrix,
    pub lambda: f64,
    pub n: usize,
    pub k: usize,
    pub s: usize,
    /// Last iteration entered, starting from 1.
    pub t: usize,
    /// Loss after each completed iteration.
    pub loss_history: Vec<f64>,
    /// Gradient RMSD at the start of each completed iteration.
    pub grad_rmsd_history: Vec<f64>,
}

impl SolverState {
    /// Initial state: `B = I`, so the rotated factors are the factors.
    pub fn new(factors: &FactorSet) -> Self {
        let n = factors.n();
        let k = factors.k();
        let s = factors.s();
        let mut a = Matrix::zeros(n, k * s);
        for (block, l) in factors.factors().iter().enumerate() {
            for i in 0..n {
                let dst = &mut a.row_mut(i)[block * s..(block + 1) * s];
                dst.copy_from_slice(l.row(i));
            }
        }
        let d = compute_d(&a, k, s, factors.lambda());
        Self {
            b: Matrix::identity(n),
            a,
            d,
            lambda: factors.lambda(),
            n,
            k,
            s,
            t: 0,
            loss_history: Vec::new(),
            grad_rmsd_history: Vec::new(),
        }
    }

    /// Current loss, computed from the cached row norms.
    pub fn loss(&self) -> f64 {
        loss_from_d(&self.d)
    }

    /// Columns of `a` belonging to matrix `k`, row by row.
    pub fn a_block(&self, k: usize) -> Matrix {
        let mut out = Matrix::zeros(self.n, self.s);
        for i in 0..self.n {
            out.row_mut(i)
                .copy_from_slice(&self.a.row(i)[k * self.s..(k + 1) * self.s]);
        }
        out
    }
}

/// Runs the iteration with the wall clock and returns the diagonalizer.
#[cfg(feature = "std")]
pub fn solve(factors: &FactorSet, config: &SolverConfig) -> Result<(Matrix, RunReport)> {
    let (state, report) = solve_with_clock(factors, config, &WallClock::new())?;
    Ok((state.b, report))
}

/// Factorizes a problem set at the configured rank and solves it.
#[cfg(feature = "std")]
pub fn solve_problem(
    problem: &crate::factor::ProblemSet,
    config: &SolverConfig,
) -> Result<(Matrix, RunReport)> {
    let rank = config
        .rank
        .unwrap_or_else(|| crate::factor::default_rank(problem.n(), problem.k()));
    let factors = crate::factor::build_factors(problem, rank, config.lambda0)?;
    solve(&factors, config)
}

/// Runs the iteration with an injected clock and returns the final state.
pub fn solve_with_clock(
    factors: &FactorSet,
    config: &SolverConfig,
    clock: &dyn Clock,
) -> Result<(SolverState, RunReport)> {
    config.validate()?;
    if let Some(rank) = config.rank {
        if rank != factors.s() {
            return Err(Error::InvalidInput(format!(
                "configured rank {rank} does not match factor rank {}",
                factors.s()
            )));
        }
    }

    let mut state = SolverState::new(factors);
    let mut alpha_history = Vec::new();
    let mut per_iteration_s = Vec::new();
    let mut line_search_s = 0.0;

    let start = clock.now_secs();
    let initial_loss = state.loss();
    let mut current_loss = initial_loss;
    let mut status = SolveStatus::MaxIter;
    let mut final_rmsd = None;

    for t in 1..=config.max_iter {
        let iter_start = clock.now_secs();
        state.t = t;

        let g = gradient(&state);
        let rmsd = grad_rmsd(&g);
        if rmsd < config.tol && t > config.min_iter {
            status = SolveStatus::Converged;
            final_rmsd = Some(rmsd);
            break;
        }

        let h = hessian_diag(&state.d, config.curvature_floor);
        let e = newton_direction(&g, &h);

        let ls_start = clock.now_secs();
        let outcome = line_search(&state, &e, config)?;
        line_search_s += clock.now_secs() - ls_start;

        let mut stalled = false;
        match outcome {
            LineSearchOutcome::Accepted {
                alpha_star,
                rotation,
                a,
                d,
                loss,
            } => {
                state.b = rotation.as_matrix().matmul(&state.b);
                state.a = a;
                state.d = d;
                current_loss = loss;
                alpha_history.push(alpha_star);
            }
            LineSearchOutcome::Rejected => {
                stalled = true;
                alpha_history.push(0.0);
            }
        }

        state.loss_history.push(current_loss);
        state.grad_rmsd_history.push(rmsd);
        per_iteration_s.push(clock.now_secs() - iter_start);

        debug_assert!(
            state
                .b
                .matmul_nt(&state.b)
                .max_abs_diff(&Matrix::identity(state.n))
                <= 1e-8,
            "diagonalizer drifted off the rotation group"
        );

        if stalled && rmsd < STALL_RMSD_FACTOR * config.tol {
            status = SolveStatus::Stalled;
            final_rmsd = Some(rmsd);
            break;
        }
    }

    let final_grad_rmsd = final_rmsd.unwrap_or_else(|| grad_rmsd(&gradient(&state)));
    let orthonormality_error = state
        .b
        .matmul_nt(&state.b)
        .max_abs_diff(&Matrix::identity(state.n));
    let total_s = clock.now_secs() - start;

    let report = RunReport {
        status,
        iterations: state.loss_history.len(),
        n: state.n,
        k: state.k,
        s: state.s,
        lambda: state.lambda,
        initial_loss,
        final_loss: current_loss,
        final_grad_rmsd,
        orthonormality_error,
        loss_history: state.loss_history.clone(),
        grad_rmsd_history: state.grad_rmsd_history.clone(),
        alpha_history,
        timings: SolveTimings {
            total_s,
            line_search_s,
            per_iteration_s,
        },
        config: config.clone(),
    };
    Ok((state, report))
}
