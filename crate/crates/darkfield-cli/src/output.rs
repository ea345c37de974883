//! Deterministic serialization: CSV tables, JSON documents, run manifests.
//!
//! Floats are printed as Rust's shortest round-trip decimals, so identical
//! runs produce identical bytes. CSV is UTF-8, comma-delimited, `\n` line
//! endings, header row, no trailing delimiter. JSON documents are single
//! objects with lexicographically sorted keys (the default `serde_json` map
//! is a BTreeMap).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::CliError;

/// A rectangular table of cells, ready for CSV or JSON emission.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// One table cell: a float (shortest round-trip), an integer, or text
/// (exact rationals, count strings).
#[derive(Clone, Debug)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Shortest decimal that round-trips to the same f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.columns.len());
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// A single JSON object: `columns` in emission order plus row arrays.
    pub fn to_json(&self, scenario: &str) -> String {
        let value = json!({
            "columns": self.columns,
            "rows": self.rows.iter()
                .map(|row| Value::Array(row.iter().map(Cell::json).collect()))
                .collect::<Vec<_>>(),
            "scenario": scenario,
        });
        pretty(&value)
    }
}

/// Serialize with sorted keys and a trailing newline.
pub fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization");
    text.push('\n');
    text
}

/// The manifest written alongside every data file.
#[allow(clippy::too_many_arguments)]
pub fn manifest(
    scenario: &str,
    request: &BTreeMap<String, Value>,
    parameters: &BTreeMap<String, Value>,
    data_file: &Path,
    format: &str,
    duration_seconds: f64,
    invariants: Option<Value>,
    notes: &[String],
    schedule_digest: Option<&str>,
    status: &str,
) -> Value {
    json!({
        "artifact": "darkfield-cli",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": scenario,
        "request": request,
        "parameters": parameters,
        "constants": {
            "hbar_joule_second": darkfield::analysis::HBAR,
            "k_boltzmann_joule_per_kelvin": darkfield::analysis::BOLTZMANN,
            "speed_of_light_meter_per_second": darkfield::analysis::SPEED_OF_LIGHT,
        },
        "data_file": data_file.display().to_string(),
        "format": format,
        "duration_seconds": duration_seconds,
        "invariants": invariants.unwrap_or(Value::Null),
        "notes": notes,
        "schedule_digest": schedule_digest,
        "status": status,
    })
}

/// Path of the manifest that accompanies a data file.
pub fn manifest_path(data_path: &Path) -> PathBuf {
    let mut name = data_path.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Write a file, creating parent directories as needed.
pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(contents.as_bytes())?;
    Ok(())
}
