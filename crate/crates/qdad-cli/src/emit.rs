//! Output writers: CSV with a '#'-prefixed header block plus a JSON sidecar,
//! or a single JSON document. Every file echoes the fully resolved
//! configuration, and all computed numbers are decimal strings produced by
//! exact rounding, so identical configs give byte-identical files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::Format;
use crate::CliError;

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Output {
    pub command: &'static str,
    pub tag: String,
    pub echo: Vec<(String, String)>,
    pub sidecar: Value,
    pub table: Option<Table>,
}

/// Write one logical output (table + metadata) under the given stem.
/// Returns the paths written.
pub fn write_output(stem: &Path, format: Format, out: &Output) -> Result<Vec<PathBuf>, CliError> {
    if let Some(parent) = stem.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(CliError::Io)?;
        }
    }
    let base = match stem.file_name() {
        Some(name) => {
            let mut n = name.to_os_string();
            n.push(&out.tag);
            stem.with_file_name(n)
        }
        None => return Err(CliError::Param(format!("bad output stem {}", stem.display()))),
    };
    let meta = json!({
        "command": out.command,
        "config": Value::Object(
            out.echo
                .iter()
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect(),
        ),
        "derived": out.sidecar,
    });
    match format {
        Format::Csv => {
            let csv_path = base.with_extension("csv");
            let json_path = base.with_extension("json");
            if let Some(table) = &out.table {
                let mut f = std::fs::File::create(&csv_path).map_err(CliError::Io)?;
                writeln!(f, "# qdad {}", out.command).map_err(CliError::Io)?;
                for (k, v) in &out.echo {
                    writeln!(f, "# {k} = {v}").map_err(CliError::Io)?;
                }
                writeln!(f, "{}", table.columns.join(",")).map_err(CliError::Io)?;
                for row in &table.rows {
                    writeln!(f, "{}", row.join(",")).map_err(CliError::Io)?;
                }
            }
            write_json(&json_path, &meta)?;
            Ok(if out.table.is_some() {
                vec![csv_path, json_path]
            } else {
                vec![json_path]
            })
        }
        Format::Json => {
            let json_path = base.with_extension("json");
            let mut doc = meta;
            if let Some(table) = &out.table {
                doc["columns"] = json!(table.columns);
                doc["rows"] = json!(table.rows);
            }
            write_json(&json_path, &doc)?;
            Ok(vec![json_path])
        }
    }
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::Io)
}
