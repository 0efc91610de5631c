//! File formats: curve and field JSON, CSV with a metadata header.

use crate::error::{Error, Result};
use crate::fields::{PeriodicVectorField, V3};
use crate::geometry::FourierCurve;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CurveFile {
    modes: usize,
    eps: f64,
    /// `coeffs[k + K][d] = [re, im]`.
    coeffs: Vec<[[f64; 2]; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FieldFile {
    n: usize,
    values: Vec<[f64; 3]>,
}

pub fn curve_to_json(c: &FourierCurve) -> Result<String> {
    let f = CurveFile {
        modes: c.modes,
        eps: c.eps,
        coeffs: c.coeffs.iter().map(|v| [0, 1, 2].map(|d| [v[d].re, v[d].im])).collect(),
    };
    Ok(serde_json::to_string_pretty(&f)?)
}

pub fn curve_from_json(s: &str) -> Result<FourierCurve> {
    let f: CurveFile = serde_json::from_str(s)?;
    if f.coeffs.len() != 2 * f.modes + 1 {
        return Err(Error::Input(format!("expected {} coefficient rows, found {}", 2 * f.modes + 1, f.coeffs.len())));
    }
    let coeffs = f.coeffs.iter().map(|v| [0, 1, 2].map(|d| Complex64::new(v[d][0], v[d][1]))).collect();
    FourierCurve::new(f.modes, f.eps, coeffs)
}

pub fn field_to_json(v: &PeriodicVectorField) -> Result<String> {
    let f = FieldFile { n: v.n(), values: v.values.iter().map(|x| [x.x, x.y, x.z]).collect() };
    Ok(serde_json::to_string_pretty(&f)?)
}

pub fn field_from_json(s: &str) -> Result<PeriodicVectorField> {
    let f: FieldFile = serde_json::from_str(s)?;
    if f.values.len() != f.n {
        return Err(Error::Input(format!("field declares n = {} but has {} values", f.n, f.values.len())));
    }
    Ok(PeriodicVectorField::new(f.values.iter().map(|a| V3::new(a[0], a[1], a[2])).collect()))
}

pub fn read_curve(path: &Path) -> Result<FourierCurve> {
    curve_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_field(path: &Path) -> Result<PeriodicVectorField> {
    field_from_json(&std::fs::read_to_string(path)?)
}

/// Hex SHA-256 of the concatenated inputs.
pub fn content_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Seventeen significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text with `#`-prefixed metadata lines, a header row and numeric rows.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Render with metadata: tool version, JSON config echo and input hash.
    pub fn render(&self, config_json: &str, input_hash: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# sbf {VERSION}");
        let _ = writeln!(out, "# config: {config_json}");
        let _ = writeln!(out, "# input-sha256: {input_hash}");
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| fmt_num(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Parse the numeric body of a CSV written by [`CsvTable::render`].
pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Input("empty CSV".into()))?;
    let mut t = CsvTable { header: header.split(',').map(str::to_string).collect(), rows: Vec::new() };
    for l in lines {
        let row: std::result::Result<Vec<f64>, _> = l.split(',').map(str::parse::<f64>).collect();
        t.rows.push(row.map_err(|e| Error::Input(format!("bad CSV number: {e}")))?);
    }
    Ok(t)
}

/// Cap rayon's pool at `SBF_THREADS` when set. Safe to call more than once.
pub fn init_threads() {
    if let Some(n) = std::env::var("SBF_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_round_trip() {
        let c = FourierCurve::circle(0.05);
        let back = curve_from_json(&curve_to_json(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 6.02e23, 5e-324] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }
}
