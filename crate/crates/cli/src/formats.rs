//! Matrix file I/O.
//!
//! The primary format is JSON, `{"n": 2, "rows": [[..], [..]]}`, written
//! with 17 significant digits so values round-trip bit-exactly. A plain
//! text fallback (one whitespace-separated row per line) is accepted on
//! input.

use anyhow::{bail, Context, Result};
use matrix_blowup::Matrix;
use serde::Deserialize;
use std::fs;
use std::path::Path;

#[derive(Debug, Deserialize)]
struct MatrixFile {
    n: usize,
    rows: Vec<Vec<f64>>,
}

/// Reads a matrix file, JSON first, falling back to whitespace text.
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading matrix file {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("parsing matrix file {}", path.display()))
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let file: MatrixFile = serde_json::from_str(trimmed)?;
        if file.rows.len() != file.n {
            bail!("declared n = {} but found {} rows", file.n, file.rows.len());
        }
        Ok(Matrix::from_rows(&file.rows)?)
    } else {
        let rows: Vec<Vec<f64>> = trimmed
            .lines()
            .map(str::trim)
            .filter(|line| !line.is_empty() && !line.starts_with('#'))
            .map(|line| {
                line.split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>()
                            .with_context(|| format!("bad number {tok:?}"))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        if rows.is_empty() {
            bail!("empty matrix file");
        }
        Ok(Matrix::from_rows(&rows)?)
    }
}

/// Renders a matrix as the JSON file format with 17-significant-digit
/// decimals (enough for a bit-exact f64 round trip).
pub fn format_matrix_json(m: &Matrix) -> String {
    let mut out = String::new();
    out.push_str(&format!("{{\n  \"n\": {},\n  \"rows\": [\n", m.n()));
    for i in 0..m.n() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str("    [");
        out.push_str(&row.join(", "));
        out.push(']');
        if i + 1 < m.n() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    fs::write(path, format_matrix_json(m))
        .with_context(|| format!("writing matrix file {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = Matrix::from_rows(&[
            vec![1.0 / 3.0, -2.0e-15],
            vec![std::f64::consts::PI, 1.0e17],
        ])
        .unwrap();
        let text = format_matrix_json(&m);
        let back = parse_matrix(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn plain_text_fallback() {
        let m = parse_matrix("1 2\n3   4\n").unwrap();
        assert_eq!(m, Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
    }

    #[test]
    fn rejects_ragged_and_non_finite_input() {
        assert!(parse_matrix("1 2\n3\n").is_err());
        assert!(parse_matrix("{\"n\": 2, \"rows\": [[1, 2], [3, 4], [5, 6]]}").is_err());
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("nan nan\nnan nan\n").is_err());
    }
}
