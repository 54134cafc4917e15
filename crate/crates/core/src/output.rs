//! Tabular results with a provenance header, written as CSV or JSON.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::error::{Error, Result};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A named table of floating-point columns plus scalar metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub description: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub meta: BTreeMap<String, Value>,
}

impl Table {
    pub fn new(name: &str, description: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.into(), value.into());
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// What produced a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub code_version: String,
    pub config_sha256: String,
    pub quad_tol: f64,
    pub quad_min_levels: u32,
    pub quad_max_levels: u32,
    pub ode_rtol: f64,
}

impl Provenance {
    pub fn of(cfg: &RunConfig) -> Self {
        Self {
            code_version: CODE_VERSION.into(),
            config_sha256: cfg.hash(),
            quad_tol: cfg.quad.tol,
            quad_min_levels: cfg.quad.min_levels,
            quad_max_levels: cfg.quad.max_levels,
            ode_rtol: crate::helmholtz::WAVE_RTOL,
        }
    }
}

fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v.is_nan() {
        "nan".into()
    } else if a == 0.0 {
        "0".into()
    } else if (1e-4..1e6).contains(&a) || a.is_infinite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_csv<W: Write>(w: &mut W, table: &Table, prov: &Provenance) -> Result<()> {
    writeln!(w, "# {}: {}", table.name, table.description)?;
    writeln!(w, "# code_version = {}", prov.code_version)?;
    writeln!(w, "# config_sha256 = {}", prov.config_sha256)?;
    writeln!(
        w,
        "# tolerances: quad_tol = {:e}, levels = {}..{}, ode_rtol = {:e}",
        prov.quad_tol, prov.quad_min_levels, prov.quad_max_levels, prov.ode_rtol
    )?;
    for (k, v) in &table.meta {
        writeln!(w, "# {k} = {v}")?;
    }
    writeln!(w, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// JSON document; non-finite cells become `null`.
pub fn to_json(table: &Table, prov: &Provenance) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            Value::Array(
                r.iter()
                    .map(|&v| if v.is_finite() { json!(v) } else { Value::Null })
                    .collect(),
            )
        })
        .collect();
    json!({
        "name": table.name,
        "description": table.description,
        "provenance": prov,
        "columns": table.columns,
        "rows": rows,
        "meta": table.meta,
    })
}

pub fn write_table<W: Write>(w: &mut W, table: &Table, prov: &Provenance, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(w, table, prov),
        OutputFormat::Json => {
            let text = serde_json::to_string(&to_json(table, prov)).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(w, "{text}")?;
            Ok(())
        }
    }
}

pub fn render(table: &Table, prov: &Provenance, format: OutputFormat) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_table(&mut buf, table, prov, format)?;
    Ok(buf)
}

/// Machine-readable error report.
pub fn error_json(err: &Error) -> String {
    json!({ "error": { "kind": err.kind(), "message": err.to_string() } }).to_string()
}
