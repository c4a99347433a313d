//! Problem sets stored as a directory of CSV files.
//!
//! Every `*.csv` file in the directory holds one `N x N` matrix as `N`
//! lines of `N` comma-separated numbers. Files are taken in lexicographic
//! name order, so `c01.csv`, `c02.csv`, ... fixes the matrix order.

use std::fs;
use std::path::{Path, PathBuf};

use jadoc_core::factor::ProblemSet;
use jadoc_core::linalg::SymmetricMatrix;
use jadoc_core::Matrix;

use crate::tensor::check_symmetry;
use crate::CliError;

/// Reads every `*.csv` matrix in the directory into a problem set.
pub fn read_problem(dir: &Path) -> Result<ProblemSet, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .map(|ext| ext.eq_ignore_ascii_case("csv"))
                    .unwrap_or(false)
        })
        .collect();
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    if paths.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no .csv files found",
            dir.display()
        )));
    }

    let mut matrices = Vec::with_capacity(paths.len());
    for path in &paths {
        let m = read_matrix(path)?;
        check_symmetry(&m, || path.display().to_string())?;
        matrices.push(SymmetricMatrix::new(m).map_err(CliError::Core)?);
    }
    ProblemSet::new(matrices).map_err(CliError::Core)
}

/// Parses one CSV file as a square matrix.
pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let fail = |line: usize, msg: String| {
        CliError::Input(format!("{}: line {line}: {msg}", path.display()))
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                fail(
                    idx + 1,
                    format!("cannot parse {:?} as a number", field.trim()),
                )
            })?;
            if !v.is_finite() {
                return Err(fail(idx + 1, "non-finite value".into()));
            }
            row.push(v);
        }
        rows.push(row);
    }

    let n = rows.len();
    if n == 0 {
        return Err(CliError::Input(format!("{}: empty matrix", path.display())));
    }
    for (idx, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(fail(
                idx + 1,
                format!("{} values in a {n}-row matrix", row.len()),
            ));
        }
    }

    let data = rows.into_iter().flatten().collect();
    Matrix::from_vec(n, n, data).map_err(CliError::Core)
}
