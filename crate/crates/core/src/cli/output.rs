//! Tables, CSV/JSON writers and sidecar files.

use super::config::{Format, RunConfig};
use crate::error::{Error, Result};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// A header row with data rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Values of a numeric column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows
            .iter()
            .map(|r| match &r[i] {
                Cell::Num(v) => Some(*v),
                Cell::Text(_) => None,
            })
            .collect()
    }
}

/// Seventeen significant digits.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("output: {e}"))
}

pub fn write_csv(table: &Table, w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(&table.columns).map_err(io_err)?;
    for row in &table.rows {
        let rec: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(v) => format_number(*v),
                Cell::Text(t) => t.clone(),
            })
            .collect();
        wr.write_record(&rec).map_err(io_err)?;
    }
    wr.flush().map_err(io_err)?;
    Ok(())
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(v) if v.is_finite() => json!(v),
        Cell::Num(v) => json!(v.to_string()),
        Cell::Text(t) => json!(t),
    }
}

pub fn table_json(table: &Table) -> Value {
    json!({
        "columns": table.columns,
        "rows": table.rows.iter().map(|r| r.iter().map(cell_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

/// Metadata block: tool, version, command and configuration echo.
pub fn sidecar(command: &str, cfg: &RunConfig, options: Value, extra: Value) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": {
            "s": cfg.params.s(),
            "n": cfg.params.n(),
            "rmin": cfg.grid.min,
            "rmax": cfg.grid.max,
            "points": cfg.grid.count,
            "spacing": cfg.grid.spacing,
            "tol": cfg.tol,
            "out": cfg.out.as_ref().map(|p| p.display().to_string()),
            "format": cfg.format,
            "options": options,
        },
        "results": extra,
    })
}

/// Path of the sidecar belonging to a CSV output file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    if out.extension().and_then(|e| e.to_str()) == Some("json") {
        out.with_extension("meta.json")
    } else {
        out.with_extension("json")
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

/// Writes a table to `cfg.out` (or stdout): CSV plus a JSON sidecar next to the file,
/// or one JSON document holding both.
pub fn emit(table: &Table, meta: Value, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    match cfg.format {
        Format::Csv => match &cfg.out {
            Some(path) => {
                let f = std::fs::File::create(path).map_err(io_err)?;
                write_csv(table, f)?;
                std::fs::write(sidecar_path(path), pretty(&meta)).map_err(io_err)
            }
            None => write_csv(table, stdout),
        },
        Format::Json => {
            let mut doc = meta;
            doc["table"] = table_json(table);
            write_document(&doc, cfg.out.as_deref(), stdout)
        }
    }
}

/// Writes a JSON document to a file or stdout.
pub fn write_document(doc: &Value, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let text = pretty(doc);
    match out {
        Some(path) => std::fs::write(path, text).map_err(io_err),
        None => stdout.write_all(text.as_bytes()).map_err(io_err),
    }
}
