//! Structured matrix types used by the solver: symmetric matrices, packed
//! strict-lower-triangular parameter blocks, and validated rotations.

mod eig;
mod expm;

pub use eig::sym_eig;
pub use expm::expm_skew;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// In builds without `std`, f64 math methods resolve through this trait.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{lu_factor, Matrix};

/// Symmetric matrix; construction symmetrizes and validates the input.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymmetricMatrix {
    values: Matrix,
}

impl SymmetricMatrix {
    /// Builds from a square matrix, replacing `M` with `(M + M^T) / 2`.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::InvalidInput(format!(
                "symmetric matrix requires a nonempty square input, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("symmetric matrix entries".into()));
        }
        let n = m.rows();
        let mut values = m;
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (values[(i, j)] + values[(j, i)]);
                values[(i, j)] = avg;
                values[(j, i)] = avg;
            }
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.values
    }

    pub fn into_matrix(self) -> Matrix {
        self.values
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.values[(i, i)]).sum()
    }
}

/// Packed strict lower triangle of an `n x n` matrix: entries `(l, m)` with
/// `l > m`, stored row by row, `n (n - 1) / 2` values in total.
///
/// The solver uses this shape for gradients, curvatures, and rotation
/// generators: a block `E` generates the skew-symmetric matrix `E - E^T`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StrictLower {
    n: usize,
    values: Vec<f64>,
}

impl StrictLower {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n * (n - 1) / 2],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Index of `(l, m)` in the packed buffer; requires `l > m`.
    #[inline]
    pub fn offset(l: usize, m: usize) -> usize {
        debug_assert!(l > m);
        l * (l - 1) / 2 + m
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.values[Self::offset(l, m)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, m: usize, value: f64) {
        self.values[Self::offset(l, m)] = value;
    }

    /// Packed row `l`, i.e. entries `(l, 0..l)`.
    #[inline]
    pub fn tri_row(&self, l: usize) -> &[f64] {
        &self.values[l * (l - 1) / 2..l * (l + 1) / 2]
    }

    pub fn add_assign(&mut self, other: &StrictLower) {
        assert_eq!(self.n, other.n);
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    /// Root mean square over all `n (n - 1) / 2` entries; zero when empty.
    pub fn rms(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let sumsq: f64 = self.values.iter().map(|&v| v * v).sum();
        (sumsq / self.values.len() as f64).sqrt()
    }

    pub fn fro_norm(&self) -> f64 {
        let sumsq: f64 = self.values.iter().map(|&v| v * v).sum();
        sumsq.sqrt()
    }

    /// Expands to the dense skew-symmetric matrix `scale * (E - E^T)`.
    pub fn to_skew_matrix(&self, scale: f64) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n, n);
        for l in 1..n {
            for m in 0..l {
                let v = scale * self.get(l, m);
                out[(l, m)] = v;
                out[(m, l)] = -v;
            }
        }
        out
    }
}

/// Extracts the strict lower triangle of a square matrix.
pub fn stril(m: &Matrix) -> StrictLower {
    assert!(m.is_square());
    let n = m.rows();
    let mut out = StrictLower::zeros(n);
    for l in 1..n {
        for mm in 0..l {
            out.set(l, mm, m[(l, mm)]);
        }
    }
    out
}

/// Deviations of a candidate rotation from the orthonormal group.
#[derive(Debug, Clone, Copy)]
pub struct RotationCheck {
    /// Largest absolute entry of `R R^T - I`.
    pub orthogonality: f64,
    /// Determinant of `R`; zero when `R` is numerically singular.
    pub det: f64,
}

/// Square orthonormal matrix with determinant one, produced by `expm_skew`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    values: Matrix,
}

impl RotationMatrix {
    /// Wraps a matrix after checking it is numerically a rotation.
    pub fn try_new(values: Matrix) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::InvalidInput(format!(
                "rotation must be square, got {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        let r = Self { values };
        let check = r.validate();
        if check.orthogonality > 1e-8 || (check.det - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidInput(format!(
                "matrix is not a rotation: |R R^T - I| = {:.3e}, det = {:.6}",
                check.orthogonality, check.det
            )));
        }
        Ok(r)
    }

    /// Internal constructor for matrices produced by the exponential map.
    pub(crate) fn new_unchecked(values: Matrix) -> Self {
        let r = Self { values };
        debug_assert!({
            let check = r.validate();
            check.orthogonality <= 1e-10 && (check.det - 1.0).abs() <= 1e-9
        });
        r
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.values
    }

    pub fn into_matrix(self) -> Matrix {
        self.values
    }

    /// Measures orthogonality deviation and determinant.
    pub fn validate(&self) -> RotationCheck {
        let n = self.values.rows();
        let gram = self.values.matmul_nt(&self.values);
        let orthogonality = gram.max_abs_diff(&Matrix::identity(n));
        let det = lu_factor(&self.values).map(|lu| lu.det()).unwrap_or(0.0);
        RotationCheck { orthogonality, det }
    }
}
