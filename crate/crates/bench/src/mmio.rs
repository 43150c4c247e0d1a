//! Matrix Market reader/writer for dense complex matrices.
//!
//! Reads `array` and `coordinate` files with `real`, `integer` or `complex`
//! fields and `general`, `symmetric`, `hermitian` or `skew-symmetric`
//! symmetry. Writes `array complex general` with 17 significant digits so
//! every `f64` round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bse_core::matrix::BseMatrixI;
use faer::{c64, Mat, MatRef};

use crate::error::BenchError;

/// Hermitian tolerance applied when loading `A`/`B` from disk.
pub const LOAD_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    SkewSymmetric,
}

impl Symmetry {
    /// Value stored at the mirrored position `(j, i)` given `(i, j)`.
    fn mirror(self, z: c64) -> c64 {
        match self {
            Symmetry::General => z,
            Symmetry::Symmetric => z,
            Symmetry::Hermitian => z.conj(),
            Symmetry::SkewSymmetric => -z,
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> BenchError {
    BenchError::Parse {
        line,
        message: msg.into(),
        file: None,
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank, non-comment line with its 1-based number.
    fn next_data(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            let t = l.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Some((i + 1, t));
        }
        None
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, BenchError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {tok:?}")))
}

fn parse_value(toks: &mut std::str::SplitWhitespace<'_>, field: Field, line: usize) -> Result<c64, BenchError> {
    let re: f64 = parse_num(toks.next(), line, "real part")?;
    let im: f64 = match field {
        Field::Real => 0.0,
        Field::Complex => parse_num(toks.next(), line, "imaginary part")?,
    };
    if toks.next().is_some() {
        return Err(parse_err(line, "trailing tokens"));
    }
    Ok(c64::new(re, im))
}

/// Parses Matrix Market text into a dense matrix.
pub fn parse_matrix_market(text: &str) -> Result<Mat<c64>, BenchError> {
    let mut raw = text.lines().enumerate();
    let (_, header) = raw.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let layout = match words[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(parse_err(1, format!("unsupported layout {other:?}"))),
    };
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_err(1, format!("unsupported field {other:?}"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry {other:?}"))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(parse_err(1, "hermitian symmetry requires a complex field"));
    }

    let mut lines = Lines { inner: raw, last: 1 };
    let (size_line, size) = lines
        .next_data()
        .ok_or_else(|| parse_err(lines.last + 1, "missing size line"))?;
    let mut toks = size.split_whitespace();
    let rows: usize = parse_num(toks.next(), size_line, "row count")?;
    let cols: usize = parse_num(toks.next(), size_line, "column count")?;
    let nnz: Option<usize> = match layout {
        Layout::Array => None,
        Layout::Coordinate => Some(parse_num(toks.next(), size_line, "entry count")?),
    };
    if toks.next().is_some() {
        return Err(parse_err(size_line, "trailing tokens on size line"));
    }
    if symmetry != Symmetry::General && rows != cols {
        return Err(parse_err(size_line, "symmetric storage requires a square matrix"));
    }

    let mut m = Mat::<c64>::zeros(rows, cols);
    let set = |i: usize, j: usize, z: c64, m: &mut Mat<c64>| {
        m[(i, j)] = z;
        if i != j {
            m[(j, i)] = symmetry.mirror(z);
        }
    };

    match layout {
        Layout::Array => {
            // column-major; symmetric variants store the lower triangle only
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = match symmetry {
                        Symmetry::General => 0,
                        Symmetry::SkewSymmetric => j + 1,
                        _ => j,
                    };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            for &(i, j) in &positions {
                let (ln, text) = lines.next_data().ok_or_else(|| {
                    parse_err(
                        lines.last + 1,
                        format!("expected {} entries, file ended early", positions.len()),
                    )
                })?;
                let z = parse_value(&mut text.split_whitespace(), field, ln)?;
                if symmetry == Symmetry::General {
                    m[(i, j)] = z;
                } else {
                    set(i, j, z, &mut m);
                }
            }
        }
        Layout::Coordinate => {
            let nnz = nnz.unwrap_or(0);
            for _ in 0..nnz {
                let (ln, text) = lines.next_data().ok_or_else(|| {
                    parse_err(lines.last + 1, format!("expected {nnz} entries, file ended early"))
                })?;
                let mut toks = text.split_whitespace();
                let i: usize = parse_num(toks.next(), ln, "row index")?;
                let j: usize = parse_num(toks.next(), ln, "column index")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(ln, format!("index ({i}, {j}) out of range")));
                }
                let z = parse_value(&mut toks, field, ln)?;
                if symmetry != Symmetry::General && j > i {
                    return Err(parse_err(ln, "symmetric storage expects lower-triangle entries"));
                }
                set(i - 1, j - 1, z, &mut m);
            }
        }
    }
    if let Some((ln, _)) = lines.next_data() {
        return Err(parse_err(ln, "more entries than the header declares"));
    }
    Ok(m)
}

/// Serializes `m` as `array complex general`.
pub fn format_matrix_market(m: MatRef<'_, c64>) -> String {
    let mut out = String::with_capacity(48 * m.nrows() * m.ncols() + 64);
    out.push_str("%%MatrixMarket matrix array complex general\n");
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            let _ = writeln!(out, "{:.16e} {:.16e}", z.re, z.im);
        }
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<Mat<c64>, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_matrix_market(&text).map_err(|e| e.in_file(path))
}

pub fn write_matrix(path: &Path, m: MatRef<'_, c64>) -> Result<(), BenchError> {
    fs::write(path, format_matrix_market(m)).map_err(|e| BenchError::io(path, e))
}

/// Loads `A` and `B` and validates them as a form-I pair.
pub fn load_matrix_pair(path_a: &Path, path_b: &Path) -> Result<BseMatrixI, BenchError> {
    let a = read_matrix(path_a)?;
    let b = read_matrix(path_b)?;
    Ok(BseMatrixI::from_blocks(a, b, LOAD_HERMITIAN_TOL)?)
}

pub fn save_matrix_pair(h: &BseMatrixI, path_a: &Path, path_b: &Path) -> Result<(), BenchError> {
    write_matrix(path_a, h.a())?;
    write_matrix(path_b, h.b())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_array_general() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real general\n% c\n2 2\n1\n2\n3\n4\n")
            .unwrap();
        assert_eq!(m[(1, 0)], c64::new(2.0, 0.0));
        assert_eq!(m[(0, 1)], c64::new(3.0, 0.0));
    }

    #[test]
    fn hermitian_coordinate_fills_upper() {
        let text = "%%MatrixMarket matrix coordinate complex hermitian\n2 2 3\n1 1 2 0\n2 1 1 0.5\n2 2 3 0\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m[(1, 0)], c64::new(1.0, 0.5));
        assert_eq!(m[(0, 1)], c64::new(1.0, -0.5));
    }

    #[test]
    fn symmetric_array_and_skew() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real symmetric\n2 2\n1\n5\n3\n").unwrap();
        assert_eq!(m[(0, 1)], c64::new(5.0, 0.0));
        let s = parse_matrix_market("%%MatrixMarket matrix array integer skew-symmetric\n2 2\n7\n").unwrap();
        assert_eq!(s[(1, 0)], c64::new(7.0, 0.0));
        assert_eq!(s[(0, 1)], c64::new(-7.0, 0.0));
        assert_eq!(s[(0, 0)], c64::new(0.0, 0.0));
    }

    #[test]
    fn size_mismatch_reports_line() {
        let err = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n").unwrap_err();
        assert!(matches!(err, BenchError::Parse { line: 6, .. }), "{err:?}");
        let err = parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\n1\n2\n").unwrap_err();
        assert!(matches!(err, BenchError::Parse { line: 4, .. }), "{err:?}");
        let err = parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\nx\n").unwrap_err();
        assert!(matches!(err, BenchError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn bad_header() {
        for text in [
            "",
            "2 2\n",
            "%%MatrixMarket matrix array pattern general\n1 1\n",
            "%%MatrixMarket matrix array real hermitian\n1 1\n1\n",
        ] {
            assert!(matches!(parse_matrix_market(text), Err(BenchError::Parse { line: 1, .. })));
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = Mat::from_fn(3, 2, |i, j| {
            c64::new(1.0 / (i as f64 + 3.0) + j as f64 * 1e-300, -f64::MIN_POSITIVE * i as f64 + 0.1)
        });
        let back = parse_matrix_market(&format_matrix_market(m.as_ref())).unwrap();
        assert_eq!(back, m);
    }
}
