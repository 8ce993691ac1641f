//! Run reports: JSON-first, with an optional flat table renderer.
//!
//! Reports are pure functions of (inputs, flags, seed); anything volatile
//! (wall clock) goes to stderr, never into the report.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct InputStamp {
    pub path: String,
    pub format: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunReport {
    /// The invoked command line, echoed verbatim.
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputStamp>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub model: Value,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub policy: Value,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub outcome: Value,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub diagnostics: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(command: String) -> Self {
        Self {
            command,
            input: None,
            model: Value::Null,
            policy: Value::Null,
            outcome: Value::Null,
            diagnostics: Value::Null,
            warnings: Vec::new(),
        }
    }
}

pub fn stamp_input(path: &std::path::Path, format: &str) -> std::io::Result<InputStamp> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(InputStamp {
        path: path.display().to_string(),
        format: format.to_string(),
        sha256,
    })
}

/// Flattens a JSON value into aligned `key: value` lines.
pub fn render_table(value: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", value, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
