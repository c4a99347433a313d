//! Matrix exponential of skew-symmetric generators via scaling and squaring
//! with an order-13 Pade approximant.

// In builds without `std`, f64 math methods resolve through this trait.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{RotationMatrix, StrictLower};
use crate::matrix::{lu_factor, Matrix};

/// Pade-13 numerator/denominator coefficients.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the order-13 approximant is used unscaled.
const THETA13: f64 = 5.371920351148152;

/// Exponential of the skew-symmetric matrix `scale * (E - E^T)`.
///
/// The generator built from a strict-lower block is exactly skew-symmetric,
/// so the result is a rotation: orthonormal with unit determinant. A zero
/// generator yields the identity exactly.
pub fn expm_skew(e: &StrictLower, scale: f64) -> Result<RotationMatrix> {
    if !scale.is_finite() || !e.values().iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("rotation generator".into()));
    }
    let skew = e.to_skew_matrix(scale);
    Ok(RotationMatrix::new_unchecked(expm(&skew)))
}

/// Matrix exponential of a general square matrix.
pub(crate) fn expm(a: &Matrix) -> Matrix {
    assert!(a.is_square());
    let n = a.rows();
    let norm = a.one_norm();

    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };

    let mut scaled = a.clone();
    if squarings > 0 {
        let factor = 0.5_f64.powi(squarings as i32);
        for v in scaled.data_mut() {
            *v *= factor;
        }
    }

    let a2 = scaled.matmul(&scaled);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);

    // u = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let mut inner = combine(
        &[(PADE13[13], &a6), (PADE13[11], &a4), (PADE13[9], &a2)],
        n,
        0.0,
    );
    inner = a6.matmul(&inner);
    let tail = combine(
        &[(PADE13[7], &a6), (PADE13[5], &a4), (PADE13[3], &a2)],
        n,
        PADE13[1],
    );
    add_into(&mut inner, &tail);
    let u = scaled.matmul(&inner);

    // v = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut v = combine(
        &[(PADE13[12], &a6), (PADE13[10], &a4), (PADE13[8], &a2)],
        n,
        0.0,
    );
    v = a6.matmul(&v);
    let tail = combine(
        &[(PADE13[6], &a6), (PADE13[4], &a4), (PADE13[2], &a2)],
        n,
        PADE13[0],
    );
    add_into(&mut v, &tail);

    // r = (v - u)^{-1} (v + u)
    let mut vm_u = v.clone();
    sub_into(&mut vm_u, &u);
    add_into(&mut v, &u);
    let lu = lu_factor(&vm_u).expect("Pade denominator is nonsingular for scaled inputs");
    let mut r = lu.solve_matrix(&v);

    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    r
}

/// Weighted sum of matrices plus `diag_term * I`.
fn combine(terms: &[(f64, &Matrix)], n: usize, diag_term: f64) -> Matrix {
    let mut out = Matrix::zeros(n, n);
    for &(w, m) in terms {
        for (o, &x) in out.data_mut().iter_mut().zip(m.data()) {
            *o += w * x;
        }
    }
    if diag_term != 0.0 {
        for i in 0..n {
            out[(i, i)] += diag_term;
        }
    }
    out
}

fn add_into(dst: &mut Matrix, src: &Matrix) {
    for (d, &s) in dst.data_mut().iter_mut().zip(src.data()) {
        *d += s;
    }
}

fn sub_into(dst: &mut Matrix, src: &Matrix) {
    for (d, &s) in dst.data_mut().iter_mut().zip(src.data()) {
        *d -= s;
    }
}
