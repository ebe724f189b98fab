//! Plain-text sampled arrays.
//!
//! ```text
//! # comments run to end of line
//! n x_min x_max        one header line per axis
//! re im                one sample per line, row-major (last axis fastest)
//! ```
//!
//! Numbers may be separated by whitespace or commas. The grid has spacing
//! `(x_max − x_min)/n`.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{Grid1D, WaveFunction};
use crate::probes::ProbeWavefunction;

fn parse_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Config {
        location: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Axis grids and samples of a raw array with `axes` axes.
pub fn parse(text: &str, axes: usize, path: &Path) -> Result<(Vec<Grid1D>, Vec<Complex64>)> {
    let mut tokens = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for tok in body.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_error(path, format!("line {}: '{tok}' is not a number", line_no + 1)))?;
            tokens.push(v);
        }
    }
    if tokens.len() < 3 * axes {
        return Err(parse_error(path, format!("header needs n, x_min, x_max for {axes} axes")));
    }
    let mut grids = Vec::with_capacity(axes);
    for a in 0..axes {
        let (n, lo, hi) = (tokens[3 * a], tokens[3 * a + 1], tokens[3 * a + 2]);
        if n.fract() != 0.0 || n < 2.0 {
            return Err(parse_error(path, format!("axis {a}: point count {n} is not an integer >= 2")));
        }
        grids.push(Grid1D::new(n as usize, lo, hi).map_err(|e| parse_error(path, format!("axis {a}: {e}")))?);
    }
    let expected: usize = grids.iter().map(Grid1D::n).product();
    let data = &tokens[3 * axes..];
    if data.len() != 2 * expected {
        return Err(parse_error(
            path,
            format!("expected {expected} complex samples, found {} numbers", data.len()),
        ));
    }
    let samples = data.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    Ok((grids, samples))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_system(path: &Path) -> Result<WaveFunction> {
    let (grids, samples) = parse(&read(path)?, 1, path)?;
    WaveFunction::new(grids[0], samples)?.normalized()
}

pub fn read_probe(path: &Path) -> Result<ProbeWavefunction> {
    let (grids, samples) = parse(&read(path)?, 2, path)?;
    ProbeWavefunction::new(grids[0], grids[1], samples)?.normalized()
}

/// Serializes samples in the format read by [`parse`].
pub fn format(grids: &[Grid1D], samples: &[Complex64]) -> String {
    let mut out = String::new();
    for g in grids {
        let _ = writeln!(out, "{} {} {}", g.n(), g.x_min(), g.x_max());
    }
    for v in samples {
        let _ = writeln!(out, "{} {}", v.re, v.im);
    }
    out
}
