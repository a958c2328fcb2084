//! Results of a run: per-point rows and diagnostics, the CSV rendering and
//! the JSON manifest.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    /// Shortest representation that parses back to the same value.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    /// Error category (`validation`, `numerical`, ...).
    pub kind: String,
    pub exit_code: i32,
    pub message: String,
}

impl Failure {
    pub fn from_error(e: &Error) -> Self {
        Self {
            kind: e.category().to_string(),
            exit_code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub config_hash: String,
    pub params: BTreeMap<String, f64>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalar by-products: scattering lengths, boundary flux, fit results.
    pub diagnostics: BTreeMap<String, f64>,
    /// Regime or contamination notes that do not invalidate the point.
    pub flags: Vec<String>,
    pub failure: Option<Failure>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub code_version: String,
    pub kind: String,
    pub name: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub columns: Vec<String>,
    pub points: Vec<PointRecord>,
    pub verdicts: Vec<Verdict>,
    /// Points taken from an earlier, interrupted run.
    pub resumed_points: usize,
    pub complete: bool,
}

impl RunRecord {
    pub fn failures(&self) -> impl Iterator<Item = &PointRecord> {
        self.points.iter().filter(|p| p.failure.is_some())
    }

    /// Exit status: 0, or the code of the first failed point.
    pub fn exit_code(&self) -> i32 {
        self.failures()
            .filter_map(|p| p.failure.as_ref().map(|f| f.exit_code))
            .next()
            .unwrap_or(0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for p in &self.points {
            for row in &p.rows {
                w.write_record(row.iter().map(Cell::render))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }

    /// Column `name` of every row, in order.
    pub fn column(&self, name: &str) -> Result<Vec<Cell>> {
        let k = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::validation("column", format!("no column {name:?}")))?;
        Ok(self.points.iter().flat_map(|p| p.rows.iter().map(move |r| r[k].clone())).collect())
    }

    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.column(name)?.iter().filter_map(Cell::as_f64).collect())
    }

    pub fn diagnostic(&self, point: usize, key: &str) -> Option<f64> {
        self.points.get(point).and_then(|p| p.diagnostics.get(key).copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_round_trip() {
        for x in [0.0, 1.0, -2.5e-300, std::f64::consts::PI, 1e300, 0.1 + 0.2] {
            let s = Cell::Num(x).render();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let json = serde_json::to_string(&Cell::Num(x)).unwrap();
            assert_eq!(serde_json::from_str::<Cell>(&json).unwrap(), Cell::Num(x));
        }
        assert_eq!(serde_json::from_str::<Cell>("\"tag\"").unwrap(), Cell::from("tag"));
    }
}
