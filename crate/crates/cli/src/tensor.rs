//! Binary container for stacks of square matrices.
//!
//! Layout: the 4-byte tag `JDT1`, the matrix count `K` and dimension `N`
//! as little-endian `u64`, then `K * N * N` little-endian `f64` values,
//! matrix by matrix in row-major order. Values are stored verbatim, so a
//! write/read cycle is bitwise lossless.

use std::fs;
use std::path::Path;

use jadoc_core::factor::ProblemSet;
use jadoc_core::linalg::SymmetricMatrix;
use jadoc_core::Matrix;

use crate::CliError;

/// File tag; the trailing digit is the format version.
pub const MAGIC: [u8; 4] = *b"JDT1";

/// Largest asymmetry `max |m[i][j] - m[j][i]|` accepted when reading a
/// problem set.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Writes matrices verbatim; they must be square, finite, and share one
/// dimension.
pub fn write(path: &Path, matrices: &[Matrix]) -> Result<(), CliError> {
    if matrices.is_empty() {
        return Err(CliError::Input(
            "refusing to write an empty tensor file".into(),
        ));
    }
    let n = matrices[0].rows();
    for (k, m) in matrices.iter().enumerate() {
        if !m.is_square() || m.rows() != n {
            return Err(CliError::Input(format!(
                "matrix {k} is {}x{} but matrix 0 is {n}x{n}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_finite() {
            return Err(CliError::Input(format!(
                "matrix {k} has non-finite entries"
            )));
        }
    }

    let mut bytes = Vec::with_capacity(20 + matrices.len() * n * n * 8);
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&(matrices.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&(n as u64).to_le_bytes());
    for m in matrices {
        for v in m.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes a problem set; the stored matrices are exactly symmetric.
pub fn write_problem(path: &Path, problem: &ProblemSet) -> Result<(), CliError> {
    let matrices: Vec<Matrix> = problem
        .matrices()
        .iter()
        .map(|m| m.as_matrix().clone())
        .collect();
    write(path, &matrices)
}

/// Reads a stack of matrices, validating the tag, the declared shape
/// against the payload length, and finiteness of every value.
pub fn read(path: &Path) -> Result<Vec<Matrix>, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let fail = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));

    if bytes.len() < 20 {
        return Err(fail(format!(
            "file too short for a tensor header ({} bytes)",
            bytes.len()
        )));
    }
    if bytes[..4] != MAGIC {
        return Err(fail(format!(
            "bad tag {:?}, expected {:?}",
            &bytes[..4],
            MAGIC.as_slice()
        )));
    }
    let k = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let n = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let (k, n) = match (usize::try_from(k), usize::try_from(n)) {
        (Ok(k), Ok(n)) => (k, n),
        _ => {
            return Err(fail(format!(
                "declared shape K={k}, N={n} does not fit in memory"
            )))
        }
    };
    if k == 0 || n == 0 {
        return Err(fail(format!("declared shape K={k}, N={n} is empty")));
    }
    let values = k
        .checked_mul(n)
        .and_then(|kn| kn.checked_mul(n))
        .ok_or_else(|| fail(format!("declared shape K={k}, N={n} overflows")))?;
    let expected = 20 + values * 8;
    if bytes.len() != expected {
        return Err(fail(format!(
            "payload is {} bytes but K={k}, N={n} requires {expected}",
            bytes.len()
        )));
    }

    let mut matrices = Vec::with_capacity(k);
    let mut offset = 20;
    for idx in 0..k {
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            let v = f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap());
            if !v.is_finite() {
                return Err(fail(format!("matrix {idx} has a non-finite entry")));
            }
            data.push(v);
            offset += 8;
        }
        matrices.push(Matrix::from_vec(n, n, data).map_err(CliError::Core)?);
    }
    Ok(matrices)
}

/// Reads a file holding exactly one matrix.
pub fn read_single(path: &Path) -> Result<Matrix, CliError> {
    let mut matrices = read(path)?;
    if matrices.len() != 1 {
        return Err(CliError::Input(format!(
            "{}: expected a single matrix, found {}",
            path.display(),
            matrices.len()
        )));
    }
    Ok(matrices.pop().unwrap())
}

/// Reads a problem set, additionally requiring each matrix to be symmetric
/// within [`SYMMETRY_TOL`].
pub fn read_problem(path: &Path) -> Result<ProblemSet, CliError> {
    let matrices = read(path)?;
    let mut symmetric = Vec::with_capacity(matrices.len());
    for (idx, m) in matrices.into_iter().enumerate() {
        check_symmetry(&m, || format!("{}: matrix {idx}", path.display()))?;
        symmetric.push(SymmetricMatrix::new(m).map_err(CliError::Core)?);
    }
    ProblemSet::new(symmetric).map_err(CliError::Core)
}

/// Fails when `max |m[i][j] - m[j][i]|` exceeds [`SYMMETRY_TOL`].
pub(crate) fn check_symmetry(m: &Matrix, context: impl Fn() -> String) -> Result<(), CliError> {
    let mut worst = 0.0f64;
    for i in 0..m.rows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_TOL {
        return Err(CliError::Input(format!(
            "{}: asymmetry {worst:.3e} exceeds the {SYMMETRY_TOL:.0e} tolerance",
            context()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Matrix> {
        vec![
            Matrix::from_vec(2, 2, vec![2.0, 0.5, 0.5, 3.0]).unwrap(),
            Matrix::from_vec(2, 2, vec![1.0, -0.25, -0.25, 4.0]).unwrap(),
        ]
    }

    #[test]
    fn roundtrip_is_bitwise_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pair.jdt");
        let original = sample();
        write(&path, &original).unwrap();
        let back = read(&path).unwrap();
        assert_eq!(back.len(), original.len());
        for (a, b) in original.iter().zip(&back) {
            let same = a
                .data()
                .iter()
                .zip(b.data())
                .all(|(x, y)| x.to_bits() == y.to_bits());
            assert!(same);
        }
    }

    #[test]
    fn bad_tag_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jdt");
        write(&path, &sample()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, bytes).unwrap();
        let err = read(&path).unwrap_err();
        assert!(err.to_string().contains("bad tag"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.jdt");
        write(&path, &sample()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        let err = read(&path).unwrap_err();
        assert!(err.to_string().contains("requires"));
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("long.jdt");
        write(&path, &sample()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, bytes).unwrap();
        assert!(read(&path).is_err());
    }

    #[test]
    fn problem_reader_rejects_asymmetry() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("skewed.jdt");
        let m = Matrix::from_vec(2, 2, vec![1.0, 0.5, 0.4, 1.0]).unwrap();
        write(&path, &[m]).unwrap();
        assert!(read(&path).is_ok());
        let err = read_problem(&path).unwrap_err();
        assert!(err.to_string().contains("asymmetry"));
    }

    #[test]
    fn single_reader_requires_one_matrix() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pair.jdt");
        write(&path, &sample()).unwrap();
        assert!(read_single(&path).is_err());
    }

    #[test]
    fn non_finite_values_are_rejected_on_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nan.jdt");
        write(&path, &sample()[..1]).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[20..28].copy_from_slice(&f64::NAN.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        let err = read(&path).unwrap_err();
        assert!(err.to_string().contains("non-finite"));
    }
}
