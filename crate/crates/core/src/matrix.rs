//! Dense row-major matrix storage and the small set of kernels the solver
//! needs: multiplication, LU factorization, and Cholesky log-determinants.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

// In builds without `std`, f64 math methods resolve through this trait.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Dense matrix of `f64` values in row-major order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Matrix of the given shape filled with zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Wraps a row-major buffer; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "buffer of length {} cannot hold a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Row `i` as a contiguous slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, &x| acc.max(x.abs()))
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, &x) in sums.iter_mut().zip(self.row(i)) {
                *s += x.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest absolute elementwise difference; shapes must match.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        let p = rhs.cols;

        let body = |i: usize, out_row: &mut [f64]| {
            for (k, &aik) in self.row(i).iter().enumerate() {
                let brow = rhs.row(k);
                for (o, &b) in out_row.iter_mut().zip(brow) {
                    *o += aik * b;
                }
            }
        };

        #[cfg(feature = "parallel")]
        out.data
            .par_chunks_mut(p)
            .enumerate()
            .for_each(|(i, out_row)| body(i, out_row));

        #[cfg(not(feature = "parallel"))]
        out.data
            .chunks_mut(p)
            .enumerate()
            .for_each(|(i, out_row)| body(i, out_row));

        out
    }

    /// `self * rhs^T`; both operands are traversed by rows.
    pub fn matmul_nt(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.cols,
            "matmul_nt shape mismatch: {}x{} * ({}x{})^T",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Matrix::zeros(self.rows, rhs.rows);
        let p = rhs.rows;

        let body = |i: usize, out_row: &mut [f64]| {
            let arow = self.row(i);
            for (j, o) in out_row.iter_mut().enumerate() {
                *o = dot(arow, rhs.row(j));
            }
        };

        #[cfg(feature = "parallel")]
        out.data
            .par_chunks_mut(p)
            .enumerate()
            .for_each(|(i, out_row)| body(i, out_row));

        #[cfg(not(feature = "parallel"))]
        out.data
            .chunks_mut(p)
            .enumerate()
            .for_each(|(i, out_row)| body(i, out_row));

        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// LU factorization with partial pivoting of a square matrix.
pub(crate) struct Lu {
    lu: Matrix,
    pivots: Vec<usize>,
    sign: f64,
}

/// Factorizes `m`; returns `None` when a pivot is exactly zero (singular).
pub(crate) fn lu_factor(m: &Matrix) -> Option<Lu> {
    assert!(m.is_square());
    let n = m.rows;
    let mut lu = m.clone();
    let mut pivots = Vec::with_capacity(n);
    let mut sign = 1.0;

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = lu[(col, col)].abs();
        for r in col + 1..n {
            let v = lu[(r, col)].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val == 0.0 {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
            sign = -sign;
        }
        pivots.push(pivot_row);

        let inv_pivot = 1.0 / lu[(col, col)];
        for r in col + 1..n {
            let factor = lu[(r, col)] * inv_pivot;
            lu[(r, col)] = factor;
            if factor != 0.0 {
                let (top, bottom) = lu.data.split_at_mut(r * n);
                let prow = &top[col * n + col + 1..col * n + n];
                let rrow = &mut bottom[col + 1..n];
                for (x, &p) in rrow.iter_mut().zip(prow) {
                    *x -= factor * p;
                }
            }
        }
    }

    Some(Lu { lu, pivots, sign })
}

impl Lu {
    pub(crate) fn det(&self) -> f64 {
        let n = self.lu.rows;
        let mut det = self.sign;
        for i in 0..n {
            det *= self.lu[(i, i)];
        }
        det
    }

    /// Solves `A * X = rhs` for `X`.
    pub(crate) fn solve_matrix(&self, rhs: &Matrix) -> Matrix {
        let n = self.lu.rows;
        assert_eq!(rhs.rows, n);
        let mut x = rhs.clone();
        let p = x.cols;

        for col in 0..n {
            let piv = self.pivots[col];
            if piv != col {
                for j in 0..p {
                    let tmp = x[(col, j)];
                    x[(col, j)] = x[(piv, j)];
                    x[(piv, j)] = tmp;
                }
            }
        }

        // Forward substitution with the unit lower factor.
        for r in 1..n {
            for col in 0..r {
                let factor = self.lu[(r, col)];
                if factor != 0.0 {
                    let (top, bottom) = x.data.split_at_mut(r * p);
                    let crow = &top[col * p..col * p + p];
                    let rrow = &mut bottom[..p];
                    for (xr, &xc) in rrow.iter_mut().zip(crow) {
                        *xr -= factor * xc;
                    }
                }
            }
        }

        // Back substitution with the upper factor.
        for r in (0..n).rev() {
            for col in r + 1..n {
                let factor = self.lu[(r, col)];
                if factor != 0.0 {
                    let (top, bottom) = x.data.split_at_mut(col * p);
                    let rrow = &mut top[r * p..r * p + p];
                    let crow = &bottom[..p];
                    for (xr, &xc) in rrow.iter_mut().zip(crow) {
                        *xr -= factor * xc;
                    }
                }
            }
            // Divide by the pivot itself: p / p is exactly 1, while
            // p * (1 / p) can be off by an ulp.
            let diag = self.lu[(r, r)];
            for v in x.row_mut(r) {
                *v /= diag;
            }
        }

        x
    }
}

/// Log-determinant of a symmetric positive definite matrix via Cholesky.
///
/// Returns `None` when the factorization hits a non-positive or non-finite
/// pivot, i.e. the matrix is not numerically positive definite.
pub(crate) fn cholesky_logdet(m: &Matrix) -> Option<f64> {
    assert!(m.is_square());
    let n = m.rows;
    let mut l = vec![0.0; n * n];
    let mut logdet = 0.0;

    for i in 0..n {
        for j in 0..=i {
            let mut acc = m[(i, j)];
            let (lrow_i, lrow_j) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            acc -= dot(lrow_i, lrow_j);
            if i == j {
                if !(acc > 0.0) || !acc.is_finite() {
                    return None;
                }
                let root = acc.sqrt();
                l[i * n + i] = root;
                logdet += acc.ln();
            } else {
                l[i * n + j] = acc / l[j * n + j];
            }
        }
    }

    Some(logdet)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        Matrix::from_vec(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn matmul_small_known_product() {
        let a = mat(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = mat(3, 2, &[7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = a.matmul(&b);
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn matmul_identity_is_exact() {
        let a = mat(3, 3, &[0.1, -2.5, 3.0, 4.0, 5.5, -6.0, 7.0, 8.0, 9.25]);
        let i = Matrix::identity(3);
        assert_eq!(i.matmul(&a), a);
        assert_eq!(a.matmul(&i), a);
    }

    #[test]
    fn matmul_nt_matches_explicit_transpose() {
        let a = mat(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 2.0]);
        let b = mat(
            4,
            3,
            &[2.0, 1.0, 0.0, -1.0, 3.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
        );
        let direct = a.matmul_nt(&b);
        let via_transpose = a.matmul(&b.transpose());
        assert!(direct.max_abs_diff(&via_transpose) == 0.0);
    }

    #[test]
    fn transpose_roundtrip() {
        let a = mat(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn one_norm_is_max_column_sum() {
        let a = mat(2, 2, &[1.0, -7.0, -2.0, 3.0]);
        assert_eq!(a.one_norm(), 10.0);
    }

    #[test]
    fn lu_det_of_known_matrix() {
        let a = mat(3, 3, &[2.0, 1.0, 1.0, 4.0, -6.0, 0.0, -2.0, 7.0, 2.0]);
        let lu = lu_factor(&a).unwrap();
        assert!((lu.det() - (-16.0)).abs() < 1e-12);
    }

    #[test]
    fn lu_detects_singular_matrix() {
        let a = mat(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(lu_factor(&a).is_none());
    }

    #[test]
    fn lu_solve_recovers_rhs() {
        let a = mat(3, 3, &[4.0, 2.0, 0.5, 2.0, 5.0, 1.0, 0.5, 1.0, 3.0]);
        let x_true = mat(3, 2, &[1.0, -2.0, 0.5, 3.0, -1.5, 0.25]);
        let rhs = a.matmul(&x_true);
        let solved = lu_factor(&a).unwrap().solve_matrix(&rhs);
        assert!(solved.max_abs_diff(&x_true) < 1e-12);
    }

    #[test]
    fn cholesky_logdet_of_known_matrix() {
        // det([[4, 2], [2, 3]]) = 8.
        let a = mat(2, 2, &[4.0, 2.0, 2.0, 3.0]);
        let ld = cholesky_logdet(&a).unwrap();
        assert!((ld - 8.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite_matrix() {
        let a = mat(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky_logdet(&a).is_none());
    }
}
