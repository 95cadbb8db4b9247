//! Rendering of command results with the resolved configuration echoed on top.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use clap::ValueEnum;
use martingale::io::SCHEMA_VERSION;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Outcome of the checks a command performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    ChecksFailed,
    TheoremViolation,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ChecksFailed => 1,
            Status::TheoremViolation => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::ChecksFailed => "checks_failed",
            Status::TheoremViolation => "theorem_violation",
        }
    }

    pub fn from_checks(passed: bool) -> Self {
        if passed {
            Status::Ok
        } else {
            Status::ChecksFailed
        }
    }
}

/// Every setting a run actually used, echoed into its output.
///
/// Thread count is deliberately absent: it cannot change results, and leaving
/// it out keeps outputs of runs that differ only in parallelism identical.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    entries: Map<String, Value>,
}

impl RunConfig {
    pub fn new(command: &str, format: Format, out: Option<&PathBuf>) -> Self {
        let mut c = Self::default();
        c.set("command", command);
        c.set("format", format.name());
        c.set("out", out.map_or(Value::Null, |p| Value::from(p.display().to_string())));
        c
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.entries.insert(key.to_string(), value.into());
        self
    }

    fn to_json(&self) -> Value {
        Value::Object(self.entries.clone())
    }
}

/// A table for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub struct Report {
    pub config: RunConfig,
    pub status: Status,
    pub result: Value,
    pub table: Table,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn header_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let doc = json!({
                    "schema_version": SCHEMA_VERSION,
                    "config": self.config.to_json(),
                    "status": self.status.name(),
                    "result": self.result,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialise");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::new();
                writeln!(s, "# schema_version={SCHEMA_VERSION}").unwrap();
                for (k, v) in &self.config.entries {
                    writeln!(s, "# {k}={}", header_value(v)).unwrap();
                }
                writeln!(s, "# status={}", self.status.name()).unwrap();
                writeln!(s, "{}", self.table.columns.join(",")).unwrap();
                for row in &self.table.rows {
                    let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
                    writeln!(s, "{}", fields.join(",")).unwrap();
                }
                s
            }
        }
    }

    pub fn emit(&self, format: Format, out: Option<&PathBuf>) -> anyhow::Result<()> {
        let text = self.render(format);
        match out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
            None => print!("{text}"),
        }
        Ok(())
    }
}
