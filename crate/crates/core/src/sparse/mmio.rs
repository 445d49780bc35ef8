//! Matrix Market coordinate reader and writer.
//!
//! Reads `real` or `integer` matrices stored as `general` or `symmetric`; writes
//! `real general` with 17 significant digits so binary64 values survive a round trip.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::csr::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn mm_err(line: usize, message: impl Into<String>) -> Error {
    Error::MatrixMarket {
        line,
        message: message.into(),
    }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix<f64>> {
    let file = File::open(path)?;
    parse_matrix_market(BufReader::new(file))
}

/// Parse a Matrix Market coordinate stream into binary64 CSR. Indices are converted
/// to 0-based, symmetric storage is mirrored, and duplicates are summed.
pub fn parse_matrix_market<R: Read>(reader: R) -> Result<CsrMatrix<f64>> {
    let mut lines = BufReader::new(reader).lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| mm_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(mm_err(1, format!("malformed header `{header}`")));
    }
    if tokens[2] != "coordinate" {
        return Err(mm_err(1, format!("unsupported format `{}`", tokens[2])));
    }
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(mm_err(1, format!("unsupported field `{other}`"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(mm_err(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut expected = 0usize;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen = 0usize;

    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut fields = t.split_whitespace();
        let mut next_num = |what: &str| -> Result<&str> {
            fields
                .next()
                .ok_or_else(|| mm_err(lineno, format!("missing {what}")))
        };
        match size {
            None => {
                let rows: usize = parse(next_num("row count")?, lineno)?;
                let cols: usize = parse(next_num("column count")?, lineno)?;
                expected = parse(next_num("entry count")?, lineno)?;
                if rows != cols {
                    return Err(mm_err(lineno, format!("matrix is {rows}x{cols}, not square")));
                }
                size = Some((rows, cols));
                let cap = if symmetry == Symmetry::Symmetric { 2 * expected } else { expected };
                triplets.reserve(cap);
            }
            Some((n, _)) => {
                let r: usize = parse(next_num("row index")?, lineno)?;
                let c: usize = parse(next_num("column index")?, lineno)?;
                let v: f64 = parse(next_num("value")?, lineno)?;
                if r == 0 || c == 0 || r > n || c > n {
                    return Err(mm_err(lineno, format!("index ({r}, {c}) outside 1..={n}")));
                }
                seen += 1;
                if seen > expected {
                    return Err(mm_err(lineno, format!("more than the declared {expected} entries")));
                }
                let (r, c) = (r - 1, c - 1);
                triplets.push((r, c, v));
                if symmetry == Symmetry::Symmetric && r != c {
                    triplets.push((c, r, v));
                }
            }
        }
    }

    let (n, _) = size.ok_or_else(|| mm_err(0, "missing size line"))?;
    if seen != expected {
        return Err(mm_err(0, format!("declared {expected} entries but found {seen}")));
    }
    CsrMatrix::from_triplets(n, &triplets)
}

fn parse<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| mm_err(line, format!("cannot parse `{tok}`")))
}

/// Header and size lines for a `real general` coordinate file.
pub fn matrix_market_header(n: usize, nnz: usize) -> String {
    format!("%%MatrixMarket matrix coordinate real general\n{n} {n} {nnz}\n")
}

pub fn write_matrix_market<W: Write>(a: &CsrMatrix<f64>, mut out: W) -> Result<()> {
    out.write_all(matrix_market_header(a.n(), a.nnz()).as_bytes())?;
    for r in 0..a.n() {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {:.16e}", r + 1, c + 1, v)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_matrix_market(a: &CsrMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_matrix_market(a, BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_diagonal() {
        let src = "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 2.0\n2 2 3.0\n";
        let a = parse_matrix_market(src.as_bytes()).unwrap();
        assert_eq!(a.to_dense(), vec![2.0, 0.0, 0.0, 3.0]);
    }

    #[test]
    fn symmetric_lower_triangle_is_mirrored() {
        let src = "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 4\n2 1 -1\n3 2 -1\n3 3 4\n";
        let a = parse_matrix_market(src.as_bytes()).unwrap();
        assert_eq!(a.nnz(), 6);
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(1, 2), -1.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn duplicates_sum() {
        let src = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 3\n1 2 4\n";
        let a = parse_matrix_market(src.as_bytes()).unwrap();
        assert_eq!(a.get(0, 1), 7.0);
    }

    #[test]
    fn rejections() {
        let cases = [
            "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n",
            "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1 0\n",
            "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n",
            "%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1\n",
            "%%MatrixMarket matrix coordinate real hermitian\n2 2 1\n1 1 1\n",
            "MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n",
            "",
        ];
        for src in cases {
            let err = parse_matrix_market(src.as_bytes()).unwrap_err();
            assert!(matches!(err, Error::MatrixMarket { .. }), "{src:?} gave {err}");
        }
    }

    #[test]
    fn write_then_read_is_bit_exact() {
        let a = CsrMatrix::from_triplets(
            3,
            &[(0, 0, 0.1f64), (0, 2, -1.0 / 3.0), (1, 1, 1e-300), (2, 0, 6.02e23)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n3 3 4\n"));
        let b = parse_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }
}
