use std::fs;
use std::io::{self, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64.
            Cell::F(x) => format!("{x:.16e}"),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.to_string())
    }
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: ToString>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(ToString::to_string).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Identifies the build and the resolved configuration of a run.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(command: &str, canonical_config: &str) -> Self {
        let digest = Sha256::digest(format!("command = {command}\n{canonical_config}").as_bytes());
        Provenance {
            command: command.to_string(),
            config_sha256: hex::encode(digest),
        }
    }

    pub fn comment(&self) -> String {
        format!(
            "# nanophonon {VERSION} command={} config_sha256={}",
            self.command, self.config_sha256
        )
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": format!("nanophonon {VERSION}"),
            "command": self.command,
            "config_sha256": self.config_sha256,
        })
    }
}

pub fn render_csv(table: &Table, prov: &Provenance) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    writeln!(buf, "{}", prov.comment()).map_err(CliError::io)?;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&table.header).map_err(CliError::io)?;
        for row in &table.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(CliError::io)?;
        }
        w.flush().map_err(CliError::io)?;
    }
    Ok(buf)
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::io(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(bytes).map_err(CliError::io),
    }
}

pub fn emit_csv(table: &Table, prov: &Provenance, path: Option<&Path>) -> Result<(), CliError> {
    emit(&render_csv(table, prov)?, path)
}

pub fn emit_json(value: &serde_json::Value, path: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::io)?;
    text.push('\n');
    emit(text.as_bytes(), path)
}

/// Serialises a value that is known to be representable.
pub fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}
