//! Matrix file formats: the JSON object `{"n", "entries"}` and the
//! Matrix Market `coordinate complex general` subset.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Json,
    MatrixMarket,
}

impl MatrixFormat {
    /// `.mtx` selects Matrix Market, anything else JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("mtx") => MatrixFormat::MatrixMarket,
            _ => MatrixFormat::Json,
        }
    }
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path)?;
    match format {
        MatrixFormat::Json => matrix_from_json(&text),
        MatrixFormat::MatrixMarket => parse_matrix_market(&text),
    }
}

pub fn write_matrix(a: &ComplexMatrix, path: &Path, format: MatrixFormat) -> Result<()> {
    let text = match format {
        MatrixFormat::Json => matrix_to_json(a),
        MatrixFormat::MatrixMarket => to_matrix_market(a),
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn matrix_to_json(a: &ComplexMatrix) -> String {
    serde_json::to_string(a).expect("matrix serialization cannot fail")
}

/// Parses either a bare matrix object or any object with a `"matrix"` field
/// holding one (the bundle written by the generator).
pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_error)?;
    let target = match value.get("matrix") {
        Some(inner) if value.get("entries").is_none() => inner.clone(),
        _ => value,
    };
    serde_json::from_value(target).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::Structural(e.to_string()),
        _ => json_error(e),
    })
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn to_matrix_market(a: &ComplexMatrix) -> String {
    let n = a.n();
    let nonzeros: Vec<(usize, usize, Complex64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, a.get(i, j)))
        .filter(|(_, _, z)| z.re != 0.0 || z.im != 0.0)
        .collect();
    let mut out = String::from("%%MatrixMarket matrix coordinate complex general\n");
    let _ = writeln!(out, "{n} {n} {}", nonzeros.len());
    for (i, j, z) in nonzeros {
        // `{:e}` prints the shortest representation that round-trips
        let _ = writeln!(out, "{} {} {:e} {:e}", i + 1, j + 1, z.re, z.im);
    }
    out
}

pub fn parse_matrix_market(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty file"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(1, 1, "header must start with %%MatrixMarket"));
    }
    let expected = ["matrix", "coordinate"];
    for (k, want) in expected.iter().enumerate() {
        if fields.get(k + 1).map(String::as_str) != Some(*want) {
            return Err(parse_err(1, column_of(header, k + 1), &format!("expected \"{want}\"")));
        }
    }
    let complex = match fields.get(3).map(String::as_str) {
        Some("complex") => true,
        Some("real") => false,
        _ => return Err(parse_err(1, column_of(header, 3), "field must be complex or real")),
    };
    if fields.get(4).map(String::as_str) != Some("general") {
        return Err(parse_err(1, column_of(header, 4), "only general symmetry is supported"));
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (dim_idx, dim_line) = body
        .next()
        .ok_or_else(|| parse_err(2, 1, "missing dimension line"))?;
    let dims = parse_numbers::<usize>(dim_line, dim_idx + 1, 3)?;
    let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
    if rows == 0 || cols == 0 {
        return Err(Error::Structural("matrix dimension must be at least 1".into()));
    }
    if rows != cols {
        return Err(Error::Structural(format!("matrix is {rows}x{cols}, expected square")));
    }
    let n = rows;
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    let mut seen = vec![false; n * n];
    let mut count = 0usize;
    let width = if complex { 4 } else { 3 };
    for (idx, line) in body {
        let lineno = idx + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != width {
            return Err(parse_err(
                lineno,
                1,
                &format!("expected {width} fields, found {}", tokens.len()),
            ));
        }
        let i: usize = parse_token(tokens[0], line, lineno, 0)?;
        let j: usize = parse_token(tokens[1], line, lineno, 1)?;
        let re: f64 = parse_token(tokens[2], line, lineno, 2)?;
        let im: f64 = if complex {
            parse_token(tokens[3], line, lineno, 3)?
        } else {
            0.0
        };
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::Structural(format!(
                "line {lineno}: index ({i}, {j}) outside 1..={n}"
            )));
        }
        let pos = (i - 1) * n + (j - 1);
        if seen[pos] {
            return Err(Error::Structural(format!("line {lineno}: duplicate entry ({i}, {j})")));
        }
        seen[pos] = true;
        data[pos] = Complex64::new(re, im);
        count += 1;
    }
    if count != nnz {
        return Err(Error::Structural(format!(
            "header declares {nnz} entries, found {count}"
        )));
    }
    ComplexMatrix::new(n, data)
}

fn parse_err(line: usize, column: usize, message: &str) -> Error {
    Error::Parse {
        line,
        column,
        message: message.to_string(),
    }
}

/// 1-based column where the `k`-th whitespace-separated token starts.
fn column_of(line: &str, k: usize) -> usize {
    let mut count = 0;
    let mut in_token = false;
    for (pos, ch) in line.char_indices() {
        if ch.is_whitespace() {
            in_token = false;
        } else if !in_token {
            if count == k {
                return pos + 1;
            }
            count += 1;
            in_token = true;
        }
    }
    line.len() + 1
}

fn parse_token<T: std::str::FromStr>(tok: &str, line: &str, lineno: usize, k: usize) -> Result<T> {
    tok.parse::<T>()
        .map_err(|_| parse_err(lineno, column_of(line, k), &format!("cannot parse \"{tok}\"")))
}

fn parse_numbers<T: std::str::FromStr>(line: &str, lineno: usize, count: usize) -> Result<Vec<T>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != count {
        return Err(parse_err(
            lineno,
            1,
            &format!("expected {count} fields, found {}", tokens.len()),
        ));
    }
    tokens
        .iter()
        .enumerate()
        .map(|(k, t)| parse_token(t, line, lineno, k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let a = ComplexMatrix::diagonal(&[c(0.5, 0.0), c(-0.25, 0.3)]);
        let back = matrix_from_json(&matrix_to_json(&a)).unwrap();
        assert_eq!(a, back);
        let awkward = ComplexMatrix::from_fn(3, |i, j| {
            c(
                (i as f64 + 0.1).sqrt() / 7.0,
                -(j as f64 + 1.0 / 3.0).ln() * 1e-17,
            )
        })
        .unwrap();
        let back = matrix_from_json(&matrix_to_json(&awkward)).unwrap();
        assert!(awkward
            .entries()
            .iter()
            .zip(back.entries())
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    }

    #[test]
    fn json_layout() {
        let a = ComplexMatrix::real_diagonal(&[0.5, -0.25]);
        assert_eq!(
            matrix_to_json(&a),
            r#"{"n":2,"entries":[[0.5,0.0],[0.0,0.0],[0.0,0.0],[-0.25,0.0]]}"#
        );
    }

    #[test]
    fn json_bundle_and_errors() {
        let bundle = r#"{"matrix": {"n": 1, "entries": [[0.5, 0.0]]}, "scale": 1.0}"#;
        assert_eq!(matrix_from_json(bundle).unwrap(), ComplexMatrix::real_diagonal(&[0.5]));
        assert!(matches!(
            matrix_from_json(r#"{"n": 0, "entries": []}"#),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            matrix_from_json(r#"{"n": 2, "entries": [[1.0, 0.0]]}"#),
            Err(Error::Structural(_))
        ));
        match matrix_from_json("{\"n\": 2,\n  \"entries\": [1.0, }") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn matrix_market_sparse_entry() {
        let text = "%%MatrixMarket matrix coordinate complex general\n% comment\n2 2 1\n1 1 0.5 0.0\n";
        let a = parse_matrix_market(text).unwrap();
        assert_eq!(a, ComplexMatrix::real_diagonal(&[0.5, 0.0]));
    }

    #[test]
    fn matrix_market_round_trip() {
        let a = ComplexMatrix::from_fn(4, |i, j| {
            if (i + j) % 3 == 0 {
                c(0.0, 0.0)
            } else {
                c(1.0 / (1.0 + i as f64), (j as f64).sqrt() - 0.7)
            }
        })
        .unwrap();
        let back = parse_matrix_market(&to_matrix_market(&a)).unwrap();
        assert!(a.max_abs_diff(&back) <= 1e-15);
    }

    #[test]
    fn matrix_market_errors() {
        let zero = "%%MatrixMarket matrix coordinate complex general\n0 0 0\n";
        assert!(matches!(parse_matrix_market(zero), Err(Error::Structural(_))));
        let rect = "%%MatrixMarket matrix coordinate complex general\n2 3 0\n";
        assert!(matches!(parse_matrix_market(rect), Err(Error::Structural(_))));
        let bad = "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 0.5 x\n";
        match parse_matrix_market(bad) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, 9);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let header = "%%MatrixMarket matrix array complex general\n2 2\n";
        assert!(matches!(parse_matrix_market(header), Err(Error::Parse { line: 1, .. })));
        let oob = "%%MatrixMarket matrix coordinate complex general\n2 2 1\n3 1 0.5 0.0\n";
        assert!(matches!(parse_matrix_market(oob), Err(Error::Structural(_))));
        let short = "%%MatrixMarket matrix coordinate complex general\n2 2 2\n1 1 0.5 0.0\n";
        assert!(matches!(parse_matrix_market(short), Err(Error::Structural(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = ComplexMatrix::diagonal(&[c(0.5, 0.0), c(-0.25, 0.3)]);
        for (name, fmt) in [("a.json", MatrixFormat::Json), ("a.mtx", MatrixFormat::MatrixMarket)] {
            let p = dir.path().join(name);
            assert_eq!(MatrixFormat::from_path(&p), fmt);
            write_matrix(&a, &p, fmt).unwrap();
            assert_eq!(read_matrix(&p, fmt).unwrap(), a);
        }
    }
}
