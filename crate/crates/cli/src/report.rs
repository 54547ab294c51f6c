//! Report serialization.

use crate::CliError;
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const OUTPUT_DIR_ENV: &str = "QFILTER_OUTPUT_DIR";

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

fn flatten(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One CSV row per trial; nested fields become dotted columns and lists are
/// written as JSON text.
pub fn to_csv(report: &Value) -> Result<String, CliError> {
    let err = |e: csv::Error| CliError::Output(e.to_string());
    let rows: Vec<Map<String, Value>> = report["trials"]
        .as_array()
        .map(|trials| {
            trials
                .iter()
                .map(|t| {
                    let mut m = Map::new();
                    m.insert("command".into(), report["command"].clone());
                    flatten("", t, &mut m);
                    m
                })
                .collect()
        })
        .unwrap_or_default();
    let mut header: Vec<String> = Vec::new();
    for r in &rows {
        for k in r.keys() {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(err)?;
    for r in &rows {
        w.write_record(header.iter().map(|k| r.get(k).map(cell).unwrap_or_default())).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

pub fn render(report: &Value, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => serde_json::to_string_pretty(report)
            .map(|s| s + "\n")
            .map_err(|e| CliError::Output(e.to_string())),
        Format::Csv => to_csv(report),
    }
}

/// Writes the report to `output`, else into the directory named by
/// [`OUTPUT_DIR_ENV`], else to stdout.
pub fn emit(report: &Value, command: &str, format: Format, output: Option<&Path>) -> Result<(), CliError> {
    let text = render(report, format)?;
    let ext = match format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let path: Option<PathBuf> = match output {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUTPUT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("{command}.{ext}"))),
    };
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(&p, text).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Output(e.to_string())),
    }
}
