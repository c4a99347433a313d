//! Argument definitions and the four subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use jadoc_core::clock::{Clock, NullClock, WallClock};
use jadoc_core::factor::{build_factors, default_rank, ProblemSet};
use jadoc_core::metrics::{diagnostics, offdiag_rmsd};
use jadoc_core::sim::{simulate, SimulationConfig};
use jadoc_core::solver::{solve_with_clock, SolverConfig, SolverState};
use jadoc_core::Matrix;

use crate::bench::{run_bench, write_csv, BenchOptions};
use crate::report::RunDocument;
use crate::{csv_dir, tensor, CliError};

/// Orthonormality deviation above which `metrics` warns about `B`.
const ORTHONORMALITY_WARN: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "jadoc",
    version,
    about = "Joint approximate diagonalization of symmetric PSD matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diagonalize a stored problem set and write the rotation B.
    Run(RunArgs),
    /// Generate a synthetic problem set and write it as a tensor file.
    Simulate(SimulateArgs),
    /// Time the solver over a grid of problem sizes and write a CSV table.
    Bench(BenchArgs),
    /// Evaluate a stored diagonalizer against a problem set.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Input problem: a tensor file or a directory of CSV matrices.
    pub input: PathBuf,
    /// Output tensor file for the diagonalizer B.
    pub output: PathBuf,
    /// Factor rank S; defaults to ceil(N / K) clamped to [1, N].
    #[arg(long)]
    pub rank: Option<usize>,
    /// Floor of the shared regularizer.
    #[arg(long, default_value_t = 1.0)]
    pub lambda0: f64,
    /// Gradient RMSD threshold for convergence.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Floor applied to the diagonal curvature estimate.
    #[arg(long, default_value_t = 1e-2)]
    pub curvature_floor: f64,
    /// Iteration budget.
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Iterations before convergence may be declared; defaults to 10 and
    /// never exceeds the iteration budget.
    #[arg(long)]
    pub min_iter: Option<usize>,
    /// Loss evaluations allowed per line search.
    #[arg(long, default_value_t = 20)]
    pub line_search_evals: usize,
    /// Interval width at which the line search stops shrinking.
    #[arg(long, default_value_t = 1e-2)]
    pub line_search_tol: f64,
    /// Also write the run record as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Order the rows of B by decreasing mean transformed diagonal.
    #[arg(long)]
    pub sort_rows: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Skip wall-clock reads so repeated runs write identical files.
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of matrices to generate.
    #[arg(long = "K", visible_alias = "k")]
    pub k: usize,
    /// Matrix dimension.
    #[arg(long = "N", visible_alias = "n")]
    pub n: usize,
    /// Eigenvector sharing in [0, 1]: 0 independent, 1 identical.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Replicate index; seeds the generator.
    #[arg(long, default_value_t = 1)]
    pub replicate: u64,
    /// Output tensor file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Grid design: 1 sweeps N at K = 10, 2 sweeps K at N = 256 * scale.
    #[arg(long)]
    pub design: u8,
    /// Comma-separated eigenvector sharing levels.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.25, 0.5, 0.75])]
    pub alpha_list: Vec<f64>,
    /// Replicates per grid point; replicate r seeds the generator with r.
    #[arg(long, default_value_t = 10)]
    pub replicates: u64,
    /// Scales every base dimension of the chosen design.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run the replicates of each grid point concurrently, each solve
    /// pinned to a single thread.
    #[arg(long)]
    pub parallel_replicates: bool,
    /// Zero every runtime column so repeated runs write identical files.
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Problem set: a tensor file or a directory of CSV matrices.
    pub matrices: PathBuf,
    /// Diagonalizer: a tensor file holding one matrix.
    pub b: PathBuf,
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Metrics(args) => cmd_metrics(args),
    }
}

/// Reads a problem set from a tensor file or a directory of CSV matrices.
fn load_problem(path: &Path) -> Result<ProblemSet, CliError> {
    if path.is_dir() {
        csv_dir::read_problem(path)
    } else {
        tensor::read_problem(path)
    }
}

/// Runs `f` on a fixed-size worker pool, or on the default pool when no
/// thread count was given.
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match threads {
        None => f(),
        Some(0) => Err(CliError::Input("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?
            .install(f),
    }
}

/// Solver settings from the `run` flags.
fn solver_config(args: &RunArgs) -> SolverConfig {
    SolverConfig {
        rank: args.rank,
        lambda0: args.lambda0,
        tol: args.tol,
        curvature_floor: args.curvature_floor,
        max_iter: args.max_iter,
        min_iter: args.min_iter.unwrap_or(10).min(args.max_iter),
        line_search_evals: args.line_search_evals,
        line_search_tol: args.line_search_tol,
    }
}

/// Reorders the rows of `B` by decreasing mean regularized row norm, ties
/// broken by original position.
fn sort_rows(state: &mut SolverState) {
    let n = state.n;
    let key: Vec<f64> = (0..n)
        .map(|i| (0..state.k).map(|k| state.d[(k, i)]).sum::<f64>() / state.k as f64)
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key[b].total_cmp(&key[a]).then(a.cmp(&b)));
    let mut sorted = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.row_mut(dst).copy_from_slice(state.b.row(src));
    }
    state.b = sorted;
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let config = solver_config(&args);
    config.validate().map_err(CliError::Core)?;
    let problem = load_problem(&args.input)?;

    let document = with_threads(args.threads, || {
        let timer = (!args.no_timings).then(Instant::now);
        let rank = config
            .rank
            .unwrap_or_else(|| default_rank(problem.n(), problem.k()));
        let factors = build_factors(&problem, rank, config.lambda0).map_err(CliError::Core)?;
        let preprocessing_s = timer.map(|t| t.elapsed().as_secs_f64()).unwrap_or(0.0);

        let identity = Matrix::identity(problem.n());
        let (rmsd_before, _) = offdiag_rmsd(&identity, &problem).map_err(CliError::Core)?;

        let wall = WallClock::new();
        let clock: &dyn Clock = if args.no_timings { &NullClock } else { &wall };
        let (mut state, report) =
            solve_with_clock(&factors, &config, clock).map_err(CliError::Core)?;

        if args.sort_rows {
            sort_rows(&mut state);
        }
        let (rmsd_after, _) = offdiag_rmsd(&state.b, &problem).map_err(CliError::Core)?;

        tensor::write(&args.output, std::slice::from_ref(&state.b))?;
        Ok(RunDocument::new(
            &report,
            preprocessing_s,
            rmsd_before,
            rmsd_after,
            None,
        ))
    })?;

    if let Some(report_path) = &args.report {
        document.write(report_path)?;
    }

    println!("status: {}", document.status);
    println!("iterations: {}", document.iterations);
    println!(
        "matrices: {}  dimension: {}  rank: {}",
        document.k, document.n, document.s
    );
    println!("lambda: {:.6}", document.lambda);
    println!(
        "loss: {:.6} -> {:.6}",
        document.initial_loss, document.final_loss
    );
    println!("gradient rmsd: {:.3e}", document.final_grad_rmsd);
    println!(
        "orthonormality error: {:.3e}",
        document.orthonormality_error
    );
    println!(
        "offdiag rmsd: {:.6e} -> {:.6e}",
        document.offdiag_rmsd_before, document.offdiag_rmsd_after
    );
    println!(
        "preprocessing: {:.3}s  solve: {:.3}s  line search: {:.3}s",
        document.timings.preprocessing_s, document.timings.total_s, document.timings.line_search_s
    );
    println!("wrote diagonalizer to {}", args.output.display());
    if let Some(report_path) = &args.report {
        println!("wrote report to {}", report_path.display());
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let config = SimulationConfig {
        k: args.k,
        n: args.n,
        replicate: args.replicate,
        alpha: args.alpha,
    };
    config.validate().map_err(CliError::Core)?;
    let problem = simulate(&config).map_err(CliError::Core)?;
    tensor::write_problem(&args.out, &problem)?;

    println!(
        "generated K={} N={} alpha={} replicate={}",
        args.k, args.n, args.alpha, args.replicate
    );
    for (k, m) in problem.matrices().iter().enumerate() {
        println!("matrix {}: trace {:.6}", k + 1, m.trace());
    }
    println!("wrote problem to {}", args.out.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let options = BenchOptions {
        design: args.design,
        scale: args.scale,
        alphas: args.alpha_list.clone(),
        replicates: args.replicates,
        solver: SolverConfig::default(),
        timed: !args.no_timings,
        parallel_replicates: args.parallel_replicates,
        progress: true,
    };
    options.validate()?;
    let rows = with_threads(args.threads, || run_bench(&options))?;
    write_csv(&args.out, &rows)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), CliError> {
    let problem = load_problem(&args.matrices)?;
    let b = tensor::read_single(&args.b)?;
    let report = diagnostics(&b, &problem).map_err(CliError::Core)?;

    if report.orthonormality_error > ORTHONORMALITY_WARN {
        eprintln!(
            "warning: diagonalizer deviates from orthonormality by {:.3e}; metrics reflect the matrix as given",
            report.orthonormality_error
        );
    }

    println!("pooled offdiag rmsd: {}", report.offdiag_rmsd);
    for (k, v) in report.per_matrix_offdiag_rmsd.iter().enumerate() {
        println!("matrix {} offdiag rmsd: {}", k + 1, v);
    }
    match report.mean_log_ratio {
        Some(v) => println!("mean log ratio: {}", v),
        None => println!("mean log ratio: undefined (singular transform)"),
    }
    println!("orthonormality error: {:.3e}", report.orthonormality_error);
    Ok(())
}
