//! `series.csv`: a header line with the fixed column names, then one row per
//! sample. Values use Rust's shortest round-trip exponent format, so a
//! stored series re-parses to the identical `f64` values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, COLUMNS};

#[derive(Debug, thiserror::Error)]
pub enum SeriesError {
    #[error("series I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("series file is empty (no header line)")]
    NoHeader,
    #[error("series header is missing columns: {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error("incomplete or malformed rows (1-based data row numbers): {}", fmt_rows(.0))]
    BadRows(Vec<usize>),
}

fn fmt_rows(rows: &[usize]) -> String {
    rows.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
}

pub fn header_line() -> String {
    COLUMNS.join(",")
}

pub fn format_row(r: &DiagnosticsRecord) -> String {
    r.values().iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
}

/// Append-only writer; every row is flushed as soon as it is written.
pub struct SeriesWriter {
    out: BufWriter<File>,
}

impl SeriesWriter {
    /// Creates (truncating) `path` and writes the header.
    pub fn create(path: &Path) -> Result<Self, SeriesError> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", header_line())?;
        out.flush()?;
        Ok(Self { out })
    }

    /// Rewrites `path` with the given rows and keeps it open for appending.
    pub fn rewrite(path: &Path, rows: &[DiagnosticsRecord]) -> Result<Self, SeriesError> {
        let mut w = Self::create(path)?;
        for r in rows {
            w.append(r)?;
        }
        Ok(w)
    }

    pub fn append(&mut self, r: &DiagnosticsRecord) -> Result<(), SeriesError> {
        writeln!(self.out, "{}", format_row(r))?;
        self.out.flush()?;
        Ok(())
    }
}

/// Parses a series; columns may appear in any order, extra columns are
/// ignored.
pub fn parse_series(text: &str) -> Result<Vec<DiagnosticsRecord>, SeriesError> {
    read_lines(text.lines().map(|l| Ok(l.to_string())))
}

pub fn read_series(path: &Path) -> Result<Vec<DiagnosticsRecord>, SeriesError> {
    let reader = BufReader::new(File::open(path)?);
    read_lines(reader.lines())
}

fn read_lines(
    mut lines: impl Iterator<Item = std::io::Result<String>>,
) -> Result<Vec<DiagnosticsRecord>, SeriesError> {
    let header = lines.next().ok_or(SeriesError::NoHeader)??;
    let names: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    let mut positions = [0usize; 14];
    let mut missing = Vec::new();
    for (slot, col) in positions.iter_mut().zip(COLUMNS) {
        match names.iter().position(|n| *n == col) {
            Some(p) => *slot = p,
            None => missing.push(col.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(SeriesError::MissingColumns(missing));
    }
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != names.len() {
            bad.push(i + 1);
            continue;
        }
        let parsed: Option<Vec<f64>> = positions
            .iter()
            .map(|&p| fields[p].trim().parse::<f64>().ok())
            .collect();
        match parsed {
            Some(v) => out.push(DiagnosticsRecord::from_values(v.try_into().expect("14 columns"))),
            None => bad.push(i + 1),
        }
    }
    if !bad.is_empty() {
        return Err(SeriesError::BadRows(bad));
    }
    Ok(out)
}
