//! Flat result tables written as CSV or JSON.
//!
//! CSV output has an optional block of `#`-prefixed metadata lines, then a
//! header row, then one record per line. Floats use Rust's shortest
//! round-trip formatting, so values re-read exactly.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value as Json};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Null,
}

impl Value {
    fn to_csv_field(&self) -> String {
        match self {
            Value::Num(v) if v.is_finite() => format!("{v}"),
            Value::Num(_) | Value::Null => String::new(),
            Value::Int(v) => v.to_string(),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Value::Num(v) => serde_json::Number::from_f64(*v)
                .map(Json::Number)
                .unwrap_or(Json::Null),
            Value::Int(v) => Json::from(*v),
            Value::Text(s) => Json::from(s.as_str()),
            Value::Bool(b) => Json::from(*b),
            Value::Null => Json::Null,
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map(Into::into).unwrap_or(Value::Null)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn check(&self) -> Result<()> {
        if let Some(i) = self.rows.iter().position(|r| r.len() != self.columns.len()) {
            return Err(Error::arg(
                "table",
                format!(
                    "row {i} has {} fields, header has {}",
                    self.rows[i].len(),
                    self.columns.len()
                ),
            ));
        }
        Ok(())
    }

    /// Rows as flat JSON objects keyed by column name.
    pub fn to_json_records(&self) -> Vec<Json> {
        self.rows
            .iter()
            .map(|row| {
                let obj: Map<String, Json> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Value::to_json))
                    .collect();
                Json::Object(obj)
            })
            .collect()
    }
}

/// Anything that can be rendered as a flat table.
pub trait Tabular {
    fn to_table(&self) -> ResultTable;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::arg("format", format!("unknown format `{s}`"))),
        }
    }
}

/// Render `table` to bytes.
///
/// Without metadata, JSON output is a bare array of records. With metadata it
/// becomes `{"metadata": ..., "records": [...]}` and CSV gains leading
/// `# key: value` lines.
pub fn render(table: &ResultTable, format: Format, metadata: Option<&Json>) -> Result<Vec<u8>> {
    table.check()?;
    match format {
        Format::Csv => {
            let mut out = Vec::new();
            if let Some(Json::Object(meta)) = metadata {
                for (k, v) in meta {
                    let text = match v {
                        Json::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    writeln!(out, "# {k}: {text}").expect("write to Vec");
                }
            }
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Value::to_csv_field))?;
            }
            w.into_inner().map_err(|e| Error::Io {
                path: "<buffer>".into(),
                source: e.into_error(),
            })
        }
        Format::Json => {
            let records = Json::Array(table.to_json_records());
            let doc = match metadata {
                Some(meta) => serde_json::json!({ "metadata": meta, "records": records }),
                None => records,
            };
            let mut out = serde_json::to_vec_pretty(&doc)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn export_results(table: &ResultTable, path: &Path, format: Format) -> Result<()> {
    export_with_metadata(table, path, format, None)
}

pub fn export_with_metadata(
    table: &ResultTable,
    path: &Path,
    format: Format,
    metadata: Option<&Json>,
) -> Result<()> {
    let bytes = render(table, format, metadata)?;
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
