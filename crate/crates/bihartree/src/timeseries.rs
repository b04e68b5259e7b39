//! CSV time series of diagnostics samples, 17 significant digits per value.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::diagnostics::DiagnosticsSample;
use crate::error::{Error, Result};
use crate::real::Real;

pub const CSV_HEADER: &str =
    "t,mass,energy,ME,MG,M_R,rhs_R,local_mass,lrstar_local,spacetime_acc,cauchy_h2";

fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

fn row<T: Real>(s: &DiagnosticsSample<T>) -> String {
    [
        s.t, s.mass, s.energy, s.me, s.mg, s.m_r, s.rhs_r, s.local_mass, s.lrstar_local,
        s.spacetime_acc, s.cauchy_h2,
    ]
    .iter()
    .map(|v| fmt17(v.as_f64()))
    .collect::<Vec<_>>()
    .join(",")
}

/// Append one sample; writes the header first when the file is new or empty.
pub fn append_timeseries<T: Real>(sample: &DiagnosticsSample<T>, path: &Path) -> Result<()> {
    let need_header = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    if need_header {
        writeln!(w, "{}", CSV_HEADER).map_err(|e| Error::io(path, e))?;
    }
    writeln!(w, "{}", row(sample)).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parsed time series as named columns.
#[derive(Debug, Clone, Default)]
pub struct TimeSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Read a diagnostics CSV back.
pub fn read_timeseries(path: &Path) -> Result<TimeSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InsufficientData(format!("{} is empty", path.display())))?
        .map_err(|e| Error::io(path, e))?;
    let columns: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| Error::ConfigParse {
            line: i + 2,
            message: format!("bad CSV value in {}: {}", path.display(), e),
        })?;
        if row.len() != columns.len() {
            return Err(Error::ConfigParse {
                line: i + 2,
                message: format!(
                    "row has {} fields, header has {}",
                    row.len(),
                    columns.len()
                ),
            });
        }
        rows.push(row);
    }
    Ok(TimeSeries { columns, rows })
}
