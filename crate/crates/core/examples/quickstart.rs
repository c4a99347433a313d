//! Simulates a small shared-structure problem, solves it, and prints the
//! diagonalization quality measured on the original matrices.

use jadoc_core::metrics::diagnostics;
use jadoc_core::sim::{simulate, SimulationConfig};
use jadoc_core::solver::{solve_problem, SolverConfig};

fn main() -> Result<(), jadoc_core::Error> {
    let problem = simulate(&SimulationConfig {
        k: 4,
        n: 24,
        replicate: 1,
        alpha: 0.75,
    })?;

    let (b, report) = solve_problem(&problem, &SolverConfig::default())?;
    let quality = diagnostics(&b, &problem)?;

    println!(
        "{} after {} iterations: loss {:.6} -> {:.6}, offdiag rmsd {:.3e}",
        report.status.label(),
        report.iterations,
        report.initial_loss,
        report.final_loss,
        quality.offdiag_rmsd
    );
    Ok(())
}
