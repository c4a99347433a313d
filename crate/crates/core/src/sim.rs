//! Synthetic problem generator: random PSD matrices with a tunable degree
//! of eigenvector sharing.
//!
//! Each matrix is `C_k = R_k D_k R_k^T` with a chi-square diagonal `D_k` and
//! a rotation `R_k = exp(Y_k - Y_k^T)` built from `Y_k = alpha X + (1 -
//! alpha) X_k`, where `X` is drawn once and `X_k` per matrix. At `alpha = 1`
//! all matrices share the rotation, hence the eigenvectors; at `alpha = 0`
//! they are independent.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::factor::ProblemSet;
use crate::linalg::{stril, SymmetricMatrix};
use crate::matrix::Matrix;

/// Name of the pseudo-random generator, recorded in run metadata so output
/// files can state how their draws were produced.
pub const GENERATOR: &str = "chacha20";

/// Inputs of the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationConfig {
    /// Number of matrices.
    pub k: usize,
    /// Dimension of each matrix.
    pub n: usize,
    /// Replicate index; seeds the generator directly.
    pub replicate: u64,
    /// Degree of eigenvector sharing, in `[0, 1]`.
    pub alpha: f64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidInput("need at least one matrix".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidInput(format!(
                "dimension must be at least 2, got {}",
                self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) || !self.alpha.is_finite() {
            return Err(Error::InvalidInput(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Generates `K` symmetric PSD matrices according to the config.
///
/// The draw order is fixed: the shared `X` first, then per matrix its `X_k`
/// followed by the `N` diagonal values, so equal configs give bitwise-equal
/// output. Generation is single-threaded to keep that order.
pub fn simulate(config: &SimulationConfig) -> Result<ProblemSet> {
    let (problem, _) = simulate_with_spectra(config)?;
    Ok(problem)
}

/// As [`simulate`], additionally returning each matrix's drawn diagonal,
/// i.e. its exact eigenvalue multiset.
pub fn simulate_with_spectra(config: &SimulationConfig) -> Result<(ProblemSet, Vec<Vec<f64>>)> {
    config.validate()?;
    let n = config.n;
    let mut rng = ChaCha20Rng::seed_from_u64(config.replicate);

    let shared = draw_matrix(&mut rng, n);

    let mut matrices = Vec::with_capacity(config.k);
    let mut spectra = Vec::with_capacity(config.k);
    for _ in 0..config.k {
        let own = draw_matrix(&mut rng, n);
        let mut blended = Matrix::zeros(n, n);
        for ((b, &s), &o) in blended
            .data_mut()
            .iter_mut()
            .zip(shared.data())
            .zip(own.data())
        {
            *b = config.alpha * s + (1.0 - config.alpha) * o;
        }
        let rotation = crate::linalg::expm_skew(&stril(&blended), 1.0)?;

        // Chi-square with one degree of freedom: a squared standard normal.
        let mut diag = Vec::with_capacity(n);
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            diag.push(z * z);
        }

        // C = (R D) R^T, scaling the rotation's columns by the diagonal.
        let r = rotation.as_matrix();
        let mut rd = r.clone();
        for i in 0..n {
            for (j, &dj) in diag.iter().enumerate() {
                rd[(i, j)] *= dj;
            }
        }
        let c = rd.matmul_nt(r);
        matrices.push(SymmetricMatrix::new(c)?);
        spectra.push(diag);
    }

    Ok((ProblemSet::new(matrices)?, spectra))
}

fn draw_matrix(rng: &mut ChaCha20Rng, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for v in m.data_mut() {
        *v = rng.sample(StandardNormal);
    }
    m
}
