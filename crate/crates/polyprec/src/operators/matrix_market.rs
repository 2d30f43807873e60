//! Matrix Market coordinate-format reader and writer (NIST banner
//! grammar). Indices are 1-based on disk, 0-based in memory; symmetric
//! storage is expanded on read.

use super::SparseMatrix;
use crate::error::{Error, Result};
use crate::Scalar;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

pub fn read_matrix_market<P: AsRef<Path>>(path: P) -> Result<SparseMatrix> {
    let file = File::open(path)?;
    parse_matrix_market(BufReader::new(file))
}

/// Parses Matrix Market coordinate data from any buffered reader.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<SparseMatrix> {
    let mut lines = reader.lines().enumerate();

    let (banner_no, banner) = match lines.next() {
        Some((no, line)) => (no + 1, line?),
        None => {
            return Err(Error::ParseError {
                line: 1,
                msg: "empty file".into(),
            });
        }
    };
    let tokens: Vec<String> = banner
        .split_whitespace()
        .map(|t| t.to_lowercase())
        .collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::ParseError {
            line: banner_no,
            msg: format!("bad banner: {banner}"),
        });
    }
    if tokens[2] != "coordinate" {
        return Err(Error::UnsupportedField(tokens[2].clone()));
    }
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "complex" => Field::Complex,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(Error::UnsupportedField(other.to_string())),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => {
            return Err(Error::ParseError {
                line: banner_no,
                msg: format!("unknown symmetry: {other}"),
            })
        }
    };

    // Size line: first non-comment line.
    let mut size: Option<(usize, usize, usize)> = None;
    let mut size_line_no = banner_no;
    for (no, line) in &mut lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::ParseError {
                line: no + 1,
                msg: format!("size line needs 3 integers: {trimmed}"),
            });
        }
        let parse = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::ParseError {
                line: no + 1,
                msg: format!("bad integer: {s}"),
            })
        };
        size = Some((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?));
        size_line_no = no + 1;
        break;
    }
    let (nrows, ncols, nnz) = size.ok_or(Error::ParseError {
        line: size_line_no,
        msg: "missing size line".into(),
    })?;
    if nrows != ncols {
        return Err(Error::ParseError {
            line: size_line_no,
            msg: format!("matrix must be square, got {nrows} x {ncols}"),
        });
    }

    let mut triplets: Vec<(usize, usize, Scalar)> = Vec::with_capacity(2 * nnz);
    let mut seen = 0usize;
    for (no, line) in &mut lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let lineno = no + 1;
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        let expected_fields = match field {
            Field::Pattern => 2,
            Field::Complex => 4,
            _ => 3,
        };
        if parts.len() < expected_fields {
            return Err(Error::ParseError {
                line: lineno,
                msg: format!("entry needs {expected_fields} fields: {trimmed}"),
            });
        }
        let idx = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| Error::ParseError {
                line: lineno,
                msg: format!("bad index: {s}"),
            })?;
            if v == 0 || v > nrows {
                return Err(Error::ParseError {
                    line: lineno,
                    msg: format!("index out of range: {v}"),
                });
            }
            Ok(v - 1)
        };
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::ParseError {
                line: lineno,
                msg: format!("bad number: {s}"),
            })
        };
        let i = idx(parts[0])?;
        let j = idx(parts[1])?;
        let v = match field {
            Field::Pattern => Scalar::new(1.0, 0.0),
            Field::Real | Field::Integer => Scalar::new(num(parts[2])?, 0.0),
            Field::Complex => Scalar::new(num(parts[2])?, num(parts[3])?),
        };
        triplets.push((i, j, v));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((j, i, v)),
                Symmetry::SkewSymmetric => triplets.push((j, i, -v)),
                Symmetry::Hermitian => triplets.push((j, i, v.conj())),
            }
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::ParseError {
            line: size_line_no,
            msg: format!("expected {nnz} entries, found {seen}"),
        });
    }
    SparseMatrix::from_triplets(nrows, triplets)
}

/// Writes coordinate-format Matrix Market (general symmetry; real when
/// all imaginary parts vanish, complex otherwise).
pub fn write_matrix_market<P: AsRef<Path>>(path: P, m: &SparseMatrix) -> Result<()> {
    let mut f = File::create(path)?;
    let real = m.is_real(0.0);
    let field = if real { "real" } else { "complex" };
    writeln!(f, "%%MatrixMarket matrix coordinate {field} general")?;
    writeln!(f, "{} {} {}", m.dim(), m.dim(), m.nnz())?;
    for i in 0..m.dim() {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals.iter()) {
            if real {
                writeln!(f, "{} {} {:.16e}", i + 1, j + 1, v.re)?;
            } else {
                writeln!(f, "{} {} {:.16e} {:.16e}", i + 1, j + 1, v.re, v.im)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn parses_identity() {
        let data = "%%MatrixMarket matrix coordinate real general\n\
                    % a comment\n\
                    2 2 2\n\
                    1 1 1.0\n\
                    2 2 1.0\n";
        let m = parse_matrix_market(Cursor::new(data)).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.get(0, 0), Scalar::new(1.0, 0.0));
        assert_eq!(m.get(1, 1), Scalar::new(1.0, 0.0));
        assert_eq!(m.get(0, 1), Scalar::new(0.0, 0.0));
    }

    #[test]
    fn expands_symmetric_lower_triangle() {
        // Lower triangle of tridiag(-1, 2, -1) with n = 3.
        let data = "%%MatrixMarket matrix coordinate real symmetric\n\
                    3 3 5\n\
                    1 1 2.0\n\
                    2 1 -1.0\n\
                    2 2 2.0\n\
                    3 2 -1.0\n\
                    3 3 2.0\n";
        let m = parse_matrix_market(Cursor::new(data)).unwrap();
        assert_eq!(m.nnz(), 7);
        assert_eq!(m.get(0, 1), Scalar::new(-1.0, 0.0));
        assert_eq!(m.get(1, 2), Scalar::new(-1.0, 0.0));
        assert_eq!(m.get(1, 0), Scalar::new(-1.0, 0.0));
        assert_eq!(m.hermitian_deviation(), 0.0);
    }

    #[test]
    fn rejects_array_format() {
        let data = "%%MatrixMarket matrix array real general\n2 2\n1.0\n0.0\n0.0\n1.0\n";
        match parse_matrix_market(Cursor::new(data)) {
            Err(Error::UnsupportedField(f)) => assert_eq!(f, "array"),
            other => panic!("expected UnsupportedField, got {other:?}"),
        }
    }

    #[test]
    fn pattern_entries_become_one() {
        let data = "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 2\n2 1\n";
        let m = parse_matrix_market(Cursor::new(data)).unwrap();
        assert_eq!(m.get(0, 1), Scalar::new(1.0, 0.0));
        assert_eq!(m.get(1, 0), Scalar::new(1.0, 0.0));
    }

    #[test]
    fn reports_line_numbers() {
        let data = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 oops 3.0\n";
        match parse_matrix_market(Cursor::new(data)) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn random_matrices_roundtrip_exactly() {
        use crate::operators::rng::SplitMix64;
        let dir = std::env::temp_dir().join(format!("polyprec-mm-rt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for seed in 0..8u64 {
            let mut rng = SplitMix64::new(seed);
            let n = 2 + rng.below(20);
            let nnz = rng.below(3 * n + 1);
            let complex = seed % 2 == 0;
            let triplets: Vec<(usize, usize, Scalar)> = (0..nnz)
                .map(|_| {
                    let v = if complex {
                        Scalar::new(rng.next_normal(), rng.next_normal())
                    } else {
                        Scalar::new(rng.next_normal(), 0.0)
                    };
                    (rng.below(n), rng.below(n), v)
                })
                .collect();
            let m = SparseMatrix::from_triplets(n, triplets).unwrap();
            let path = dir.join(format!("rt-{seed}.mtx"));
            write_matrix_market(&path, &m).unwrap();
            let back = read_matrix_market(&path).unwrap();
            assert_eq!(back.dim(), m.dim(), "seed {seed}");
            assert_eq!(back.nnz(), m.nnz(), "seed {seed}");
            for i in 0..n {
                for j in 0..n {
                    let d = (back.get(i, j) - m.get(i, j)).norm();
                    assert!(d < 1e-15 * m.max_abs().max(1.0), "seed {seed} ({i},{j})");
                }
            }
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn complex_roundtrip_through_file() {
        let dir = std::env::temp_dir().join(format!("polyprec-mm-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.mtx");
        let m = SparseMatrix::from_triplets(
            2,
            vec![
                (0, 0, Scalar::new(1.5, -0.5)),
                (1, 0, Scalar::new(0.25, 2.0)),
            ],
        )
        .unwrap();
        write_matrix_market(&path, &m).unwrap();
        let back = read_matrix_market(&path).unwrap();
        assert_eq!(back.dim(), 2);
        assert!((back.get(0, 0) - m.get(0, 0)).norm() < 1e-15);
        assert!((back.get(1, 0) - m.get(1, 0)).norm() < 1e-15);
        std::fs::remove_dir_all(&dir).ok();
    }
}
