//! Report envelopes and their TSV and JSON renderings.
//!
//! A report is an envelope (tool, version, workspace, command, parameters,
//! timestamp) around a payload of named tables or chart series. Both
//! renderings carry the same values; only `generated_at` varies between
//! runs, so payload comparisons ignore it.

use std::fmt::{self, Write as _};

use chrono::{NaiveDate, SecondsFormat, Utc};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::crossdb::StepSeries;
use crate::metrics::Percent;

/// One table cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Null,
    Int(u64),
    Text(String),
    Bool(bool),
    Date(NaiveDate),
    Percent(Percent),
}

impl Value {
    pub fn text(s: impl fmt::Display) -> Self {
        Value::Text(s.to_string())
    }

    pub fn opt<T: Into<Value>>(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v as u64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<NaiveDate> for Value {
    fn from(v: NaiveDate) -> Self {
        Value::Date(v)
    }
}

impl From<Percent> for Value {
    fn from(v: Percent) -> Self {
        Value::Percent(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Int(v) => write!(f, "{v}"),
            Value::Text(v) => f.write_str(&escape_tsv(v)),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Date(v) => write!(f, "{v}"),
            Value::Percent(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Null => s.serialize_none(),
            Value::Int(v) => s.serialize_u64(*v),
            Value::Text(v) => s.serialize_str(v),
            Value::Bool(v) => s.serialize_bool(*v),
            Value::Date(v) => s.collect_str(v),
            Value::Percent(v) => v.serialize(s),
        }
    }
}

fn escape_tsv(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\t', "\\t").replace('\n', "\\n").replace('\r', "\\r")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_owned(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Tables(Vec<Table>),
    Series(Vec<StepSeries>),
}

impl Payload {
    pub fn table(&self, name: &str) -> Option<&Table> {
        match self {
            Payload::Tables(t) => t.iter().find(|t| t.name == name),
            Payload::Series(_) => None,
        }
    }

    /// The payload alone as JSON, for byte-level comparisons.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("payload serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub workspace: Option<String>,
    pub command: String,
    /// Parameters in the order given.
    pub parameters: Vec<(String, String)>,
    pub generated_at: String,
    pub payload: Payload,
}

struct Params<'a>(&'a [(String, String)]);

impl Serialize for Params<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(7))?;
        m.serialize_entry("tool", &self.tool)?;
        m.serialize_entry("version", &self.version)?;
        m.serialize_entry("workspace", &self.workspace)?;
        m.serialize_entry("command", &self.command)?;
        m.serialize_entry("parameters", &Params(&self.parameters))?;
        m.serialize_entry("generated_at", &self.generated_at)?;
        m.serialize_entry("payload", &self.payload)?;
        m.end()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Tsv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tsv" => Ok(OutputFormat::Tsv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?} (expected tsv or json)")),
        }
    }
}

impl Report {
    pub fn new(command: &str, workspace: Option<&str>, parameters: Vec<(String, String)>, payload: Payload) -> Self {
        Report {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            workspace: workspace.map(str::to_owned),
            command: command.to_owned(),
            parameters,
            generated_at: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            payload,
        }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Tsv => self.to_tsv(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# tool: {} {}", self.tool, self.version);
        if let Some(ws) = &self.workspace {
            let _ = writeln!(out, "# workspace: {ws}");
        }
        let _ = writeln!(out, "# command: {}", self.command);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "# parameter: {k}={}", escape_tsv(v));
        }
        let _ = writeln!(out, "# generated_at: {}", self.generated_at);
        out.push_str(&payload_tsv(&self.payload));
        out
    }
}

/// The payload part of the TSV rendering.
pub fn payload_tsv(payload: &Payload) -> String {
    let mut out = String::new();
    match payload {
        Payload::Tables(tables) => {
            for t in tables {
                let _ = writeln!(out, "# table: {}", t.name);
                let _ = writeln!(out, "{}", t.columns.join("\t"));
                for row in &t.rows {
                    let cells: Vec<String> = row.iter().map(Value::to_string).collect();
                    let _ = writeln!(out, "{}", cells.join("\t"));
                }
            }
        }
        Payload::Series(series) => {
            let _ = writeln!(out, "# table: series");
            let _ = writeln!(out, "group\trecord\tdate\tpresent");
            for s in series {
                for (date, present) in &s.steps {
                    let _ = writeln!(out, "{}\t{}\t{date}\t{present}", escape_tsv(&s.group), escape_tsv(&s.record.to_string()));
                }
            }
        }
    }
    out
}

/// Splits a TSV rendering back into tables, dropping the envelope lines.
pub fn parse_tsv_tables(text: &str) -> Vec<(String, Vec<String>, Vec<Vec<String>>)> {
    let mut tables: Vec<(String, Vec<String>, Vec<Vec<String>>)> = Vec::new();
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.next() {
        if let Some(name) = line.strip_prefix("# table: ") {
            let header = lines.next().unwrap_or("").split('\t').map(str::to_owned).collect();
            let mut rows = Vec::new();
            while let Some(next) = lines.peek() {
                if next.starts_with("# ") {
                    break;
                }
                rows.push(next.split('\t').map(str::to_owned).collect());
                lines.next();
            }
            tables.push((name.to_owned(), header, rows));
        }
    }
    tables
}
