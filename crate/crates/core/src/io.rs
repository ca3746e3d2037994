//! Plain CSV interchange for matrices and vectors: one row per line,
//! comma-separated, `.` as decimal separator. Values are written in Rust's
//! shortest round-trip float format, so a write/read cycle is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::numerics::{DenseMatrix, NumericsError};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: cannot parse {token:?} as a number")]
    Parse { line: usize, token: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("no data rows")]
    Empty,
    #[error(transparent)]
    Matrix(#[from] NumericsError),
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix, CsvError> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut count = 0;
        for token in line.split(',') {
            let token = token.trim();
            let v: f64 = token.parse().map_err(|_| CsvError::Parse {
                line: idx + 1,
                token: token.to_string(),
            })?;
            data.push(v);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(CsvError::Ragged { line: idx + 1, expected: c, found: count })
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or(CsvError::Empty)?;
    Ok(DenseMatrix::from_row_major(rows, cols, data)?)
}

/// Reads a vector stored either as one value per line or as a single row.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, CsvError> {
    let m = parse_matrix(text)?;
    if m.cols() == 1 || m.rows() == 1 {
        Ok(m.as_slice().to_vec())
    } else {
        Err(CsvError::Ragged { line: 2, expected: 1, found: m.cols() })
    }
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn format_vector(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}\n")).collect()
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix, CsvError> {
    parse_matrix(&read(path.as_ref())?)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>, CsvError> {
    parse_vector(&read(path.as_ref())?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<(), CsvError> {
    write(path.as_ref(), &format_matrix(m))
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<(), CsvError> {
    write(path.as_ref(), &format_vector(v))
}

fn read(path: &Path) -> Result<String, CsvError> {
    fs::read_to_string(path).map_err(|source| CsvError::Io { path: path.display().to_string(), source })
}

pub(crate) fn write(path: &Path, text: &str) -> Result<(), CsvError> {
    fs::write(path, text).map_err(|source| CsvError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let m = parse_matrix("# header\n1, 2\n\n3,4.5\n").unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.5]]));
    }

    #[test]
    fn ragged_rejected() {
        assert!(matches!(parse_matrix("1,2\n3\n"), Err(CsvError::Ragged { line: 2, .. })));
        assert!(matches!(parse_matrix("1,x\n"), Err(CsvError::Parse { .. })));
        assert!(matches!(parse_matrix("\n"), Err(CsvError::Empty)));
    }

    #[test]
    fn vectors_in_either_orientation() {
        assert_eq!(parse_vector("1\n2\n3\n").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_vector("1,2,3\n").unwrap(), vec![1.0, 2.0, 3.0]);
    }

    proptest! {
        #[test]
        fn matrix_text_round_trip(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
            let mut rng = crate::rng::SeededRng::new(seed);
            let m = DenseMatrix::from_fn(rows, cols, |_, _| rng.normal() * 1e3);
            prop_assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
        }
    }
}
