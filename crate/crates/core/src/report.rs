//! Report envelopes and their JSON/CSV emission.
//!
//! JSON keys are sorted and every float is written with 17 significant
//! digits, so emit -> parse -> emit is byte-identical.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::suite::Check;
use crate::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Echo of the command line; every report embeds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliConfig {
    pub command: String,
    pub m: usize,
    pub seed: u64,
    pub restarts: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            m: 3,
            seed: 42,
            restarts: 100,
            tol: 1e-8,
            out: None,
            format: Format::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub violations: usize,
    pub status: String,
    pub rows: Vec<Check>,
}

impl Summary {
    pub fn new(rows: Vec<Check>) -> Self {
        let violations = rows.iter().filter(|r| r.violated()).count();
        Self {
            checks: rows.len(),
            violations,
            status: if violations == 0 {
                "ok"
            } else {
                "tolerance_violation"
            }
            .to_string(),
            rows,
        }
    }

    pub fn violated(&self) -> bool {
        self.violations > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub version: String,
    pub config: CliConfig,
    pub timestamp: String,
    pub payload: Value,
    pub summary: Summary,
}

impl ReportEnvelope {
    pub fn new(config: CliConfig, payload: Value, rows: Vec<Check>) -> Self {
        Self {
            version: VERSION.to_string(),
            config,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            payload,
            summary: Summary::new(rows),
        }
    }
}

pub fn emit_report(envelope: &ReportEnvelope, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(to_json(envelope)?.into_bytes()),
        Format::Csv => to_csv(&envelope.summary.rows),
    }
}

/// Canonical JSON of any serializable value.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json's map is ordered, so keys come out sorted
    let value = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    Ok(out)
}

pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize, out: &mut String| out.extend(std::iter::repeat_n(' ', n));
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_f64(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(indent + 2, out);
                write_value(item, indent + 2, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                pad(indent + 2, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(v, indent + 2, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

/// One row per check, with a header.
pub fn to_csv(rows: &[Check]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "value", "tolerance", "verdict", "gating", "note"])?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            format_f64(r.value),
            r.tolerance.map(format_f64).unwrap_or_default(),
            r.verdict.to_string(),
            r.gating.to_string(),
            r.note.clone(),
        ])?;
    }
    w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
}
