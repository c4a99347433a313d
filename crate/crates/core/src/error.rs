//! Error type shared across the crate.

use alloc::string::String;

/// Errors reported by constructors, factorization, and the solver.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A matrix or configuration value has an invalid shape or range.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A value that must be finite is NaN or infinite.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    /// An input matrix is not positive semi-definite.
    #[error("matrix {index} is not positive semi-definite (smallest eigenvalue {eigenvalue:.3e})")]
    NotPsd { index: usize, eigenvalue: f64 },
    /// An iterative kernel failed to converge within its sweep budget.
    #[error("eigendecomposition did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
