//! JSON document written by `run --report`.

use std::fs;
use std::path::Path;

use jadoc_core::report::RunReport;
use jadoc_core::sim;
use jadoc_core::solver::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Seed bookkeeping for runs on generated inputs; absent for file inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RngMetadata {
    /// Name of the generator behind the seed.
    pub generator: String,
    /// Seed the problem set was generated from.
    pub seed: u64,
}

impl RngMetadata {
    pub fn for_replicate(seed: u64) -> Self {
        Self {
            generator: sim::GENERATOR.to_string(),
            seed,
        }
    }
}

/// Full record of one solver run, ready for serialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunDocument {
    /// Termination label: `converged`, `max-iter`, or `stall`.
    pub status: String,
    pub iterations: usize,
    pub n: usize,
    pub k: usize,
    /// Factor rank the run used.
    pub s: usize,
    /// Shared regularizer after the truncation correction.
    pub lambda: f64,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub final_grad_rmsd: f64,
    /// Largest absolute entry of `B B^T - I`.
    pub orthonormality_error: f64,
    /// Pooled off-diagonal RMSD of the inputs, before rotation.
    pub offdiag_rmsd_before: f64,
    /// Pooled off-diagonal RMSD of `B C_k B^T` at the returned `B`.
    pub offdiag_rmsd_after: f64,
    pub loss_history: Vec<f64>,
    pub grad_rmsd_history: Vec<f64>,
    /// Accepted step size per iteration; zero marks a rejected line search.
    pub alpha_history: Vec<f64>,
    pub timings: DocumentTimings,
    /// Solver configuration the run actually used.
    pub config: SolverConfig,
    /// Present when the input came from the seeded generator.
    pub rng: Option<RngMetadata>,
}

/// Wall-clock phases; all zero when timings are disabled.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentTimings {
    /// Eigendecomposition and factor construction before the iteration.
    pub preprocessing_s: f64,
    /// Whole iteration phase.
    pub total_s: f64,
    /// Time inside line searches, including trial rotations.
    pub line_search_s: f64,
    /// Per-iteration durations.
    pub per_iteration_s: Vec<f64>,
}

impl RunDocument {
    pub fn new(
        report: &RunReport,
        preprocessing_s: f64,
        offdiag_rmsd_before: f64,
        offdiag_rmsd_after: f64,
        rng: Option<RngMetadata>,
    ) -> Self {
        Self {
            status: report.status.label().to_string(),
            iterations: report.iterations,
            n: report.n,
            k: report.k,
            s: report.s,
            lambda: report.lambda,
            initial_loss: report.initial_loss,
            final_loss: report.final_loss,
            final_grad_rmsd: report.final_grad_rmsd,
            orthonormality_error: report.orthonormality_error,
            offdiag_rmsd_before,
            offdiag_rmsd_after,
            loss_history: report.loss_history.clone(),
            grad_rmsd_history: report.grad_rmsd_history.clone(),
            alpha_history: report.alpha_history.clone(),
            timings: DocumentTimings {
                preprocessing_s,
                total_s: report.timings.total_s,
                line_search_s: report.timings.line_search_s,
                per_iteration_s: report.timings.per_iteration_s.clone(),
            },
            config: report.config.clone(),
            rng,
        }
    }

    /// Writes the document as pretty-printed JSON with a trailing newline.
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        fs::write(path, body).map_err(|e| CliError::io(path, e))
    }
}
