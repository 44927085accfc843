//! Result rendering with an embedded run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Json,
    Csv,
    Table,
}

impl Emit {
    pub fn extension(self) -> &'static str {
        match self {
            Emit::Json => "json",
            Emit::Csv => "csv",
            Emit::Table => "txt",
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, params: Value, seed: Option<u64>, outputs: Vec<String>) -> Self {
        RunManifest {
            command: command.to_string(),
            params,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp(),
            outputs,
        }
    }

    /// Same run, ignoring when it happened and where it was written.
    pub fn same_run(&self, other: &RunManifest) -> bool {
        self.command == other.command
            && self.params == other.params
            && self.seed == other.seed
            && self.tool_version == other.tool_version
    }
}

/// RFC 3339 time from `SOURCE_DATE_EPOCH` if set, otherwise now.
pub fn timestamp() -> String {
    let secs = match std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
    {
        Some(s) => s,
        None => std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs() as i64)
            .unwrap_or(0),
    };
    chrono::DateTime::from_timestamp(secs, 0)
        .map(|t| t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
        .unwrap_or_default()
}

/// `x` rounded to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

pub fn format_number(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let r = round_sig(x, digits);
    if r == 0.0 {
        return "0".into();
    }
    if (1e-5..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Round every floating-point number in `v` in place.
pub fn round_json(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round_sig(x, digits)))
            {
                *n = x;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(|x| round_json(x, digits)),
        Value::Object(m) => m.values_mut().for_each(|x| round_json(x, digits)),
        _ => {}
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn render(&self, digits: usize) -> String {
        match self {
            Cell::Num(x) => format_number(*x, digits),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub notes: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            notes: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

/// A command's result in all the shapes it can be emitted in.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub json: Value,
    pub table: Option<Table>,
    /// Files written by the command itself.
    pub extra_outputs: Vec<PathBuf>,
}

pub fn manifest_line(manifest: &RunManifest) -> String {
    format!(
        "# manifest: {}\n",
        serde_json::to_string(manifest).expect("manifest serialises")
    )
}

pub fn csv_record(cells: &[String]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(cells).expect("in-memory csv write");
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

pub fn render(
    artifact: &Artifact,
    manifest: &RunManifest,
    emit: Emit,
    digits: usize,
) -> Result<String> {
    let need_table = || {
        artifact.table.as_ref().ok_or_else(|| {
            Error::config(format!(
                "`{}` cannot be emitted as {emit:?}",
                manifest.command
            ))
        })
    };
    match emit {
        Emit::Json => {
            let mut result = artifact.json.clone();
            round_json(&mut result, digits);
            let doc = json!({ "manifest": manifest, "result": result });
            Ok(serde_json::to_string_pretty(&doc).expect("json value serialises") + "\n")
        }
        Emit::Csv => {
            let t = need_table()?;
            let mut out = manifest_line(manifest);
            for n in &t.notes {
                out += &format!("# {n}\n");
            }
            out += &csv_record(&t.header);
            for row in &t.rows {
                out += &csv_record(&row.iter().map(|c| c.render(digits)).collect::<Vec<_>>());
            }
            Ok(out)
        }
        Emit::Table => {
            let t = need_table()?;
            let body: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| r.iter().map(|c| c.render(digits)).collect())
                .collect();
            let mut widths: Vec<usize> = t.header.iter().map(|h| h.chars().count()).collect();
            for row in &body {
                for (w, c) in widths.iter_mut().zip(row) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let line = |cells: &[String]| {
                let s: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect();
                s.join("  ").trim_end().to_string() + "\n"
            };
            let mut out = format!(
                "{} {} ({})\n",
                manifest.command, manifest.tool_version, manifest.timestamp
            );
            out += &line(&t.header);
            for row in &body {
                out += &line(row);
            }
            for n in &t.notes {
                out += &format!("note: {n}\n");
            }
            Ok(out)
        }
    }
}

/// Where an artifact goes besides stdout.
pub fn artifact_path(
    output: Option<&Path>,
    out_dir: Option<&Path>,
    command: &str,
    emit: Emit,
) -> Option<PathBuf> {
    match (output, out_dir) {
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(d)) => Some(d.join(format!("{command}.{}", emit.extension()))),
        (None, None) => None,
    }
}

pub fn deliver(text: &str, path: Option<&Path>) -> Result<()> {
    if let Some(p) = path {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(p, text).map_err(|e| Error::io(p, e))?;
    }
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io("<stdout>", e))
}
