//! Deterministic output emission: RFC-4180 CSV with 12-significant-digit
//! floats, and a JSON summary. Identical spec + seed must produce
//! byte-identical files, so nothing time- or path-dependent is written.

use std::path::{Path, PathBuf};

use crate::runner::RunError;

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    UInt(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Cell {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Cell {
        Cell::UInt(v)
    }
}

/// 12 significant digits, scientific notation, `.` decimal separator.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.11e}")
    }
}

fn format_cell(cell: &Cell) -> String {
    match cell {
        Cell::UInt(v) => v.to_string(),
        Cell::Float(v) => format_float(*v),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

/// A header plus data rows, ready for CSV serialization.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Table {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width matches header");
        self.rows.push(row);
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>, RunError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(&self.header)
            .map_err(|e| RunError::Io(e.to_string()))?;
        for row in &self.rows {
            let record: Vec<String> = row.iter().map(format_cell).collect();
            writer
                .write_record(&record)
                .map_err(|e| RunError::Io(e.to_string()))?;
        }
        writer.into_inner().map_err(|e| RunError::Io(e.to_string()))
    }
}

pub fn write_csv(path: &Path, table: &Table) -> Result<(), RunError> {
    let bytes = table.to_csv_bytes()?;
    std::fs::write(path, bytes).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, summary: &serde_json::Value) -> Result<(), RunError> {
    let mut bytes = serde_json::to_vec_pretty(summary).map_err(|e| RunError::Io(e.to_string()))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

pub fn csv_path(out_dir: &Path, stem: &str) -> PathBuf {
    out_dir.join(format!("{stem}.csv"))
}

pub fn json_path(out_dir: &Path, stem: &str) -> PathBuf {
    out_dir.join(format!("{stem}.json"))
}
