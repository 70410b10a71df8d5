//! Minimal CSV tables with a fixed, locale-free number format.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(k) => write!(out, "{k}").unwrap(),
            Cell::Real(x) if x.is_nan() => out.push_str("NaN"),
            Cell::Real(x) => write!(out, "{x:.16e}").unwrap(),
            Cell::Text(s) => out.push_str(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(k) => Some(*k as f64),
            Cell::Real(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx].clone()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }

    /// Writes `<dir>/<name>.csv`, creating `dir` if needed.
    pub fn write(&self, dir: &Path, name: &str) -> CliResult<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = dir.join(format!("{name}.csv"));
        std::fs::write(&path, self.to_csv()).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

/// Parses text written by [`Table::to_csv`]. Integers without a decimal
/// point or exponent come back as [`Cell::Int`], other numbers as
/// [`Cell::Real`], anything else as [`Cell::Text`].
pub fn parse_csv(text: &str) -> CliResult<Table> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::usage("empty CSV"))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut table = Table::new(header);
    for line in lines {
        let row: Vec<Cell> = line
            .split(',')
            .map(|f| {
                if let Ok(k) = f.parse::<u64>() {
                    Cell::Int(k)
                } else if let Ok(x) = f.parse::<f64>() {
                    Cell::Real(x)
                } else {
                    Cell::Text(f.to_string())
                }
            })
            .collect();
        if row.len() != table.header.len() {
            return Err(CliError::usage(format!("CSV row has {} fields, expected {}", row.len(), table.header.len())));
        }
        table.rows.push(row);
    }
    Ok(table)
}
