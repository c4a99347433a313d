//! Command line front end for `jadoc-core`.
//!
//! Four subcommands cover the workflow end to end: `run` diagonalizes a
//! stored problem set, `simulate` generates synthetic problem sets,
//! `bench` times the solver over size grids, and `metrics` evaluates a
//! stored diagonalizer. File formats live in [`tensor`] and [`csv_dir`],
//! report serialization in [`report`], and the benchmark harness in
//! [`bench`].

use std::path::PathBuf;

pub mod bench;
pub mod commands;
pub mod csv_dir;
pub mod report;
pub mod tensor;

/// Errors surfaced to the terminal, each carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] jadoc_core::Error),
    #[error("{0}")]
    Input(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Exit code for this error: 3 for inputs that fail the positive
    /// semi-definite check, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(jadoc_core::Error::NotPsd { .. }) => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Parses the process arguments, runs the selected command, and returns the
/// exit code: 0 on success, 2 on invalid input, 3 on a non-PSD matrix.
pub fn run_cli() -> i32 {
    let cli = <commands::Cli as clap::Parser>::parse();
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
