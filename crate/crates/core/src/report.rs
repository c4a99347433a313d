//! Run summaries produced by the solver.

use alloc::vec::Vec;

use crate::solver::SolverConfig;

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SolveStatus {
    /// Gradient RMSD fell below the tolerance after the minimum iterations.
    Converged,
    /// The iteration budget ran out first.
    MaxIter,
    /// No loss-reducing step could be found near a small-gradient point.
    Stalled,
}

impl SolveStatus {
    /// Stable lowercase label used in reports and CLI output.
    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max-iter",
            SolveStatus::Stalled => "stall",
        }
    }
}

/// Wall-clock phases of one solve; all zero under a null clock.
#[derive(Debug, Clone, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveTimings {
    /// Whole solve, from first gradient to termination.
    pub total_s: f64,
    /// Time spent inside line searches, including trial rotations.
    pub line_search_s: f64,
    /// Per-iteration durations, one entry per completed iteration.
    pub per_iteration_s: Vec<f64>,
}

/// Summary of one solver run.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunReport {
    pub status: SolveStatus,
    /// Completed iterations; histories below have exactly this length.
    pub iterations: usize,
    pub n: usize,
    pub k: usize,
    /// Factor rank used for this run.
    pub s: usize,
    /// Shared regularizer.
    pub lambda: f64,
    /// Loss at the initial (identity) diagonalizer.
    pub initial_loss: f64,
    /// Loss after the last completed iteration.
    pub final_loss: f64,
    /// Gradient RMSD at termination.
    pub final_grad_rmsd: f64,
    /// Largest absolute entry of `B B^T - I` at termination.
    pub orthonormality_error: f64,
    /// Loss after each iteration.
    pub loss_history: Vec<f64>,
    /// Gradient RMSD measured at the start of each iteration.
    pub grad_rmsd_history: Vec<f64>,
    /// Accepted step size per iteration; zero marks a rejected line search.
    pub alpha_history: Vec<f64>,
    pub timings: SolveTimings,
    /// Configuration the run actually used.
    pub config: SolverConfig,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_labels_are_stable() {
        assert_eq!(SolveStatus::Converged.label(), "converged");
        assert_eq!(SolveStatus::MaxIter.label(), "max-iter");
        assert_eq!(SolveStatus::Stalled.label(), "stall");
    }
}
