//! Plain-text snapshot format.
//!
//! ```text
//! # benjamin snapshot
//! format_version 1
//! N <n_modes>
//! L <domain_scale>
//! t <time>
//! <k> <re> <im>        (2N + 1 lines, k = -N..=N)
//! ```
//!
//! Reals are written with 17 significant digits (`{:.16e}`), which round-trips
//! every `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: SpectralField,
}

/// Fixed 17-significant-digit scientific notation.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_snapshot(time: f64, field: &SpectralField) -> String {
    let mut out = String::with_capacity(64 * (2 * field.n_modes() + 6));
    out.push_str("# benjamin snapshot\n");
    let _ = writeln!(out, "format_version {FORMAT_VERSION}");
    let _ = writeln!(out, "N {}", field.n_modes());
    let _ = writeln!(out, "L {}", fmt_real(field.domain_scale()));
    let _ = writeln!(out, "t {}", fmt_real(time));
    for (k, c) in field.indices().zip(field.coeffs()) {
        let _ = writeln!(out, "{k} {} {}", fmt_real(c.re), fmt_real(c.im));
    }
    out
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut header = |key: &str| -> Result<(usize, String)> {
        let (line, text) = lines.next().ok_or_else(|| Error::Format {
            line: 0,
            message: format!("missing `{key}` header"),
        })?;
        match text.split_once(char::is_whitespace) {
            Some((k, v)) if k == key => Ok((line, v.trim().to_string())),
            _ => Err(Error::Format {
                line,
                message: format!("expected `{key} <value>`, found `{text}`"),
            }),
        }
    };
    let (line, version) = header("format_version")?;
    let version: u32 = parse_num(&version, line)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format {
            line,
            message: format!("unsupported format version {version}"),
        });
    }
    let (line, n) = header("N")?;
    let n: usize = parse_num(&n, line)?;
    let (line, l) = header("L")?;
    let l: f64 = parse_num(&l, line)?;
    let (line, t) = header("t")?;
    let time: f64 = parse_num(&t, line)?;

    let mut coeffs = Vec::with_capacity(2 * n + 1);
    for expected in -(n as i64)..=n as i64 {
        let (line, text) = lines.next().ok_or_else(|| Error::Format {
            line: 0,
            message: format!("expected {} coefficient lines, found {}", 2 * n + 1, coeffs.len()),
        })?;
        let parts: Vec<&str> = text.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Format {
                line,
                message: format!("expected `k re im`, found `{text}`"),
            });
        }
        let k: i64 = parse_num(parts[0], line)?;
        if k != expected {
            return Err(Error::Format {
                line,
                message: format!("expected mode {expected}, found {k}"),
            });
        }
        coeffs.push(Complex64::new(parse_num(parts[1], line)?, parse_num(parts[2], line)?));
    }
    if let Some((line, text)) = lines.next() {
        return Err(Error::Format {
            line,
            message: format!("trailing content `{text}`"),
        });
    }
    let field = SpectralField::from_coeffs(n, l, coeffs).map_err(|e| Error::Format {
        line: 0,
        message: e.to_string(),
    })?;
    Ok(Snapshot { time, field })
}

pub fn write_snapshot(path: impl AsRef<Path>, time: f64, field: &SpectralField) -> Result<()> {
    fs::write(path, format_snapshot(time, field))?;
    Ok(())
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    parse_snapshot(&fs::read_to_string(path)?)
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Format {
        line,
        message: format!("cannot parse `{s}` as a number"),
    })
}
