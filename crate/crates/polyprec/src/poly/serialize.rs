//! Plain-text polynomial files: representation tag plus interval or node
//! list plus coefficients, 17 significant digits.

use super::{ChebyshevPoly, ContourLSPoly, NewtonPoly, PrecondPoly};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::Scalar;
use num_complex::Complex64;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter};
use std::path::Path;

pub fn write_poly_file<P: AsRef<Path>>(path: P, q: &dyn PrecondPoly) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    q.write_text(&mut w)?;
    Ok(())
}

struct LineReader<R> {
    inner: R,
    lineno: usize,
}

impl<R: BufRead> LineReader<R> {
    fn next_line(&mut self) -> Result<String> {
        let mut buf = String::new();
        loop {
            buf.clear();
            let n = self.inner.read_line(&mut buf)?;
            self.lineno += 1;
            if n == 0 {
                return Err(Error::ParseError {
                    line: self.lineno,
                    msg: "unexpected end of file".into(),
                });
            }
            let trimmed = buf.trim();
            if !trimmed.is_empty() {
                return Ok(trimmed.to_string());
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::ParseError {
            line: self.lineno,
            msg: msg.into(),
        }
    }

    fn expect_tagged(&mut self, tag: &str) -> Result<Vec<String>> {
        let line = self.next_line()?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some(t) if t == tag => Ok(parts.map(|s| s.to_string()).collect()),
            _ => Err(self.err(format!("expected `{tag} ...`, got `{line}`"))),
        }
    }

    fn read_f64(&mut self, s: &str) -> Result<f64> {
        s.parse().map_err(|_| self.err(format!("bad number: {s}")))
    }

    fn read_complex_line(&mut self) -> Result<Scalar> {
        let line = self.next_line()?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(self.err(format!("expected `re im`, got `{line}`")));
        }
        let re = self.read_f64(parts[0])?;
        let im = self.read_f64(parts[1])?;
        Ok(Complex64::new(re, im))
    }
}

/// Loads a polynomial previously written by [`write_poly_file`].
pub fn read_poly_file<P: AsRef<Path>>(path: P) -> Result<Box<dyn PrecondPoly>> {
    let mut r = LineReader {
        inner: BufReader::new(File::open(path)?),
        lineno: 0,
    };

    let header = r.next_line()?;
    if header != "polyprec poly v1" {
        return Err(r.err(format!("bad header: {header}")));
    }
    let kind = r.expect_tagged("kind")?;
    let kind = kind.first().cloned().unwrap_or_default();

    match kind.as_str() {
        "chebyshev" => {
            let iv = r.expect_tagged("interval")?;
            if iv.len() != 2 {
                return Err(r.err("interval needs two numbers"));
            }
            let a = r.read_f64(&iv[0])?;
            let b = r.read_f64(&iv[1])?;
            let n = parse_count(&mut r, "coeffs")?;
            let mut coeffs = Vec::with_capacity(n);
            for _ in 0..n {
                let line = r.next_line()?;
                coeffs.push(r.read_f64(&line)?);
            }
            Ok(Box::new(ChebyshevPoly::from_coeffs(a, b, coeffs)?))
        }
        "ritz_newton" => {
            let n = parse_count(&mut r, "nodes")?;
            let mut nodes = Vec::with_capacity(n);
            for _ in 0..n {
                nodes.push(r.read_complex_line()?);
            }
            let m = parse_count(&mut r, "diffs")?;
            if m != n {
                return Err(r.err("node and coefficient counts differ"));
            }
            let mut diffs = Vec::with_capacity(m);
            for _ in 0..m {
                diffs.push(r.read_complex_line()?);
            }
            Ok(Box::new(NewtonPoly::from_parts(nodes, diffs)))
        }
        "contour_ls" => {
            let n = parse_count(&mut r, "nodes")?;
            let mut nodes = Vec::with_capacity(n);
            for _ in 0..n {
                nodes.push(r.read_complex_line()?);
            }
            let dims = r.expect_tagged("hsmall")?;
            if dims.len() != 2 {
                return Err(r.err("hsmall needs rows and cols"));
            }
            let rows: usize = dims[0].parse().map_err(|_| r.err("bad hsmall rows"))?;
            let cols: usize = dims[1].parse().map_err(|_| r.err("bad hsmall cols"))?;
            let mut h = DenseMatrix::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    h.set(i, j, r.read_complex_line()?);
                }
            }
            let k = parse_count(&mut r, "alpha")?;
            let mut alpha = Vec::with_capacity(k);
            for _ in 0..k {
                alpha.push(r.read_complex_line()?);
            }
            Ok(Box::new(ContourLSPoly::from_parts(nodes, h, alpha)))
        }
        other => Err(r.err(format!("unknown polynomial kind: {other}"))),
    }
}

fn parse_count<R: BufRead>(r: &mut LineReader<R>, tag: &str) -> Result<usize> {
    let parts = r.expect_tagged(tag)?;
    parts
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| r.err(format!("bad {tag} count")))
}
