//! Rendering to CSV, JSON and text, and atomic file output.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::args::Format;
use crate::error::{CliError, Status};

/// Bumped whenever a JSON field or CSV column changes meaning.
pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Plot-ready rows with a fixed header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Everything a command produced, before formatting.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub table: Table,
    pub result: Value,
    /// Human-readable lines printed above the table.
    pub summary: Vec<String>,
    pub status: Status,
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && x.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Success => "success",
        Status::Failure => "failure",
        Status::Shortfall => "reliability_shortfall",
        Status::ConfigRejected => "config_rejected",
    }
}

pub fn document(config: &Value, rendered: &Rendered) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "artifact_version": ARTIFACT_VERSION,
        "config": config,
        "status": status_str(rendered.status),
        "result": rendered.result,
        "error": Value::Null,
    })
}

pub fn error_document(config: &Value, err: &CliError) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "artifact_version": ARTIFACT_VERSION,
        "config": config,
        "status": status_str(err.status()),
        "result": Value::Null,
        "error": { "message": err.to_string() },
    })
}

pub fn to_csv(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io {
        path: "<csv buffer>".into(),
        source: e.into_error(),
    })
}

pub fn to_pretty(rendered: &Rendered) -> String {
    let mut out = String::new();
    for line in &rendered.summary {
        out.push_str(line);
        out.push('\n');
    }
    let t = &rendered.table;
    if t.header.is_empty() {
        return out;
    }
    let mut width: Vec<usize> = t.header.iter().map(|h| h.len()).collect();
    for r in &t.rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    if !rendered.summary.is_empty() {
        out.push('\n');
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    out.push_str(&line(t.header.clone()));
    for r in &t.rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

/// Serializes in the requested format.
pub fn render_bytes(format: Format, config: &Value, rendered: &Rendered) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => to_csv(&rendered.table),
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&document(config, rendered))?;
            v.push(b'\n');
            Ok(v)
        }
        Format::Pretty => Ok(to_pretty(rendered).into_bytes()),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Sidecar path carrying config and version next to a CSV file.
pub fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    s.into()
}

pub fn sidecar_bytes(config: &Value, rendered: &Rendered) -> Result<Vec<u8>, CliError> {
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "artifact_version": ARTIFACT_VERSION,
        "config": config,
        "status": status_str(rendered.status),
        "columns": rendered.table.header,
    });
    let mut b = serde_json::to_vec_pretty(&v)?;
    b.push(b'\n');
    Ok(b)
}
