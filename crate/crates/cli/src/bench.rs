//! Benchmark harness: times the solver on generated problem sets over two
//! size grids and renders the results as CSV.
//!
//! Design 1 sweeps the dimension at a fixed matrix count, design 2 sweeps
//! the matrix count at a fixed dimension. Every cell `(N, K, alpha,
//! replicate)` generates its problem set from the replicate index as seed,
//! factorizes, solves, and records the solve wall time together with the
//! iteration count, the pooled off-diagonal RMSD, and the final loss.
//! After each grid point a `median` row aggregates its replicates.

use std::fs;
use std::path::Path;

use jadoc_core::clock::{Clock, NullClock, WallClock};
use jadoc_core::factor::{build_factors, default_rank};
use jadoc_core::metrics::offdiag_rmsd;
use jadoc_core::sim::{simulate, SimulationConfig};
use jadoc_core::solver::{solve_with_clock, SolverConfig};
use rayon::prelude::*;

use crate::CliError;

/// Column list of the emitted CSV, in order.
pub const CSV_HEADER: &str =
    "design,N,K,alpha,replicate,runtime_s,iterations,offdiag_rmsd,final_loss";

/// Base dimensions of design 1, scaled by `--scale`; `K` is fixed at 10.
pub const DESIGN1_BASE_N: [usize; 5] = [100, 200, 300, 400, 500];

/// Matrix counts of design 2; the dimension is `round(256 * scale)`.
pub const DESIGN2_K: [usize; 5] = [2, 4, 8, 16, 32];

/// One `(N, K)` combination of a design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPoint {
    pub n: usize,
    pub k: usize,
}

/// Grid of a design at a scale factor; dimensions never drop below 2.
pub fn design_grid(design: u8, scale: f64) -> Result<Vec<GridPoint>, CliError> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(CliError::Input(format!(
            "scale must be positive and finite, got {scale}"
        )));
    }
    let scaled = |base: usize| (((base as f64) * scale).round() as usize).max(2);
    match design {
        1 => Ok(DESIGN1_BASE_N
            .iter()
            .map(|&base| GridPoint {
                n: scaled(base),
                k: 10,
            })
            .collect()),
        2 => {
            let n = scaled(256);
            Ok(DESIGN2_K.iter().map(|&k| GridPoint { n, k }).collect())
        }
        other => Err(CliError::Input(format!(
            "design must be 1 or 2, got {other}"
        ))),
    }
}

/// Everything one benchmark invocation needs.
#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub design: u8,
    pub scale: f64,
    /// Eigenvector sharing levels to sweep, each in `[0, 1]`.
    pub alphas: Vec<f64>,
    /// Replicates per grid point; replicate `r` seeds the generator with `r`.
    pub replicates: u64,
    pub solver: SolverConfig,
    /// When false, a null clock makes every runtime column zero.
    pub timed: bool,
    /// Run the replicates of a grid point concurrently, each solve pinned
    /// to one thread so the timings stay clean.
    pub parallel_replicates: bool,
    /// Print one progress line per cell to stderr.
    pub progress: bool,
}

impl BenchOptions {
    pub fn validate(&self) -> Result<(), CliError> {
        design_grid(self.design, self.scale)?;
        if self.replicates == 0 {
            return Err(CliError::Input("need at least one replicate".into()));
        }
        if self.alphas.is_empty() {
            return Err(CliError::Input("need at least one alpha".into()));
        }
        for &alpha in &self.alphas {
            if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
                return Err(CliError::Input(format!(
                    "alpha must lie in [0, 1], got {alpha}"
                )));
            }
        }
        self.solver.validate().map_err(CliError::Core)
    }
}

/// One CSV row; `replicate` is an index or the literal `median`.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub design: u8,
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub replicate: String,
    pub runtime_s: f64,
    /// Integer for replicate rows; medians of even counts may be halves.
    pub iterations: f64,
    pub offdiag_rmsd: f64,
    pub final_loss: f64,
}

/// Measurements of one cell, before CSV formatting.
#[derive(Debug, Clone, Copy)]
struct CellResult {
    runtime_s: f64,
    iterations: f64,
    offdiag_rmsd: f64,
    final_loss: f64,
}

fn run_cell(
    point: GridPoint,
    alpha: f64,
    replicate: u64,
    solver: &SolverConfig,
    timed: bool,
) -> Result<CellResult, CliError> {
    let sim = SimulationConfig {
        k: point.k,
        n: point.n,
        replicate,
        alpha,
    };
    let problem = simulate(&sim).map_err(CliError::Core)?;
    let rank = solver
        .rank
        .unwrap_or_else(|| default_rank(problem.n(), problem.k()));
    let factors = build_factors(&problem, rank, solver.lambda0).map_err(CliError::Core)?;

    let wall = WallClock::new();
    let clock: &dyn Clock = if timed { &wall } else { &NullClock };
    let (state, report) = solve_with_clock(&factors, solver, clock).map_err(CliError::Core)?;
    let (pooled, _) = offdiag_rmsd(&state.b, &problem).map_err(CliError::Core)?;

    Ok(CellResult {
        runtime_s: report.timings.total_s,
        iterations: report.iterations as f64,
        offdiag_rmsd: pooled,
        final_loss: report.final_loss,
    })
}

/// `run_cell` inside a fresh single-thread pool, keeping the measured solve
/// free of intra-solve parallelism.
fn run_cell_pinned(
    point: GridPoint,
    alpha: f64,
    replicate: u64,
    solver: &SolverConfig,
    timed: bool,
) -> Result<CellResult, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    pool.install(|| run_cell(point, alpha, replicate, solver, timed))
}

/// Runs the whole grid and returns replicate rows plus one `median` row per
/// grid point, in emission order.
pub fn run_bench(options: &BenchOptions) -> Result<Vec<BenchRow>, CliError> {
    options.validate()?;
    let grid = design_grid(options.design, options.scale)?;

    let mut rows = Vec::new();
    for &alpha in &options.alphas {
        for &point in &grid {
            let replicates: Vec<u64> = (1..=options.replicates).collect();
            let cells: Vec<CellResult> = if options.parallel_replicates {
                replicates
                    .par_iter()
                    .map(|&r| run_cell_pinned(point, alpha, r, &options.solver, options.timed))
                    .collect::<Result<_, _>>()?
            } else {
                replicates
                    .iter()
                    .map(|&r| run_cell(point, alpha, r, &options.solver, options.timed))
                    .collect::<Result<_, _>>()?
            };

            for (cell, &r) in cells.iter().zip(&replicates) {
                if options.progress {
                    eprintln!(
                        "design {} N={} K={} alpha={} replicate {r}: {:.3}s, {} iterations",
                        options.design, point.n, point.k, alpha, cell.runtime_s, cell.iterations
                    );
                }
                rows.push(BenchRow {
                    design: options.design,
                    n: point.n,
                    k: point.k,
                    alpha,
                    replicate: r.to_string(),
                    runtime_s: cell.runtime_s,
                    iterations: cell.iterations,
                    offdiag_rmsd: cell.offdiag_rmsd,
                    final_loss: cell.final_loss,
                });
            }

            rows.push(BenchRow {
                design: options.design,
                n: point.n,
                k: point.k,
                alpha,
                replicate: "median".to_string(),
                runtime_s: median(cells.iter().map(|c| c.runtime_s)),
                iterations: median(cells.iter().map(|c| c.iterations)),
                offdiag_rmsd: median(cells.iter().map(|c| c.offdiag_rmsd)),
                final_loss: median(cells.iter().map(|c| c.final_loss)),
            });
        }
    }
    Ok(rows)
}

/// Median of a nonempty sequence; even lengths average the two middles.
pub fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut sorted: Vec<f64> = values.collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("median of NaN"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Renders rows as CSV text with the pinned header.
pub fn format_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.design,
            row.n,
            row.k,
            row.alpha,
            row.replicate,
            row.runtime_s,
            row.iterations,
            row.offdiag_rmsd,
            row.final_loss
        ));
    }
    out
}

/// Writes the rows to a CSV file.
pub fn write_csv(path: &Path, rows: &[BenchRow]) -> Result<(), CliError> {
    fs::write(path, format_csv(rows)).map_err(|e| CliError::io(path, e))
}
