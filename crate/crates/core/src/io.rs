//! Text serialization of spectral fields.
//!
//! ```text
//! airyfield v1 <n_modes> <dk>
//! <j> <re> <im>
//! ```
//! with one line per mode `j ∈ [-n/2, n/2)` in ascending order.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::spectral::{FourierGrid, SpectralField, C64};

const MAGIC: &str = "airyfield";
const VERSION: &str = "v1";

pub fn write_field(f: &SpectralField) -> String {
    let grid = f.grid();
    let mut out = format!("{MAGIC} {VERSION} {} {:.16e}\n", grid.n_modes(), grid.dk());
    for (i, c) in f.coeffs().iter().enumerate() {
        writeln!(out, "{} {:.16e} {:.16e}", grid.mode(i), c.re, c.im).expect("writing to a string");
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_field(text: &str) -> Result<SpectralField> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != MAGIC {
        return Err(parse_err(1, format!("expected `{MAGIC} {VERSION} n_modes dk`")));
    }
    if parts[1] != VERSION {
        return Err(parse_err(1, format!("unsupported version {}", parts[1])));
    }
    let n: usize = parts[2].parse().map_err(|_| parse_err(1, format!("bad mode count {}", parts[2])))?;
    let dk: f64 = parts[3].parse().map_err(|_| parse_err(1, format!("bad dk {}", parts[3])))?;
    let grid = FourierGrid::new(n, dk).map_err(|e| parse_err(1, e.to_string()))?;
    let mut coeffs = Vec::with_capacity(n);
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(lineno, "expected `j re im`"));
        }
        let j: i64 = fields[0].parse().map_err(|_| parse_err(lineno, format!("bad mode index {}", fields[0])))?;
        if coeffs.len() >= n {
            return Err(parse_err(lineno, format!("more than {n} mode lines")));
        }
        let expected = grid.mode(coeffs.len());
        if j != expected {
            return Err(parse_err(lineno, format!("expected mode {expected}, found {j}")));
        }
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| parse_err(lineno, format!("bad number {s}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(lineno, format!("non-finite value {s}")))
            }
        };
        coeffs.push(C64::new(num(fields[1])?, num(fields[2])?));
    }
    if coeffs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: coeffs.len() });
    }
    SpectralField::new(grid, coeffs)
}
