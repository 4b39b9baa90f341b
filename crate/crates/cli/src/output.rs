use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub values: Vec<f64>,
}

/// One command's output. Rows share `columns`; the label is a leading
/// text column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub schema_version: String,
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub results: Vec<Row>,
    pub diagnostics: BTreeMap<String, Value>,
}

impl OutputRecord {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        OutputRecord {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            params: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            results: Vec::new(),
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn diag(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.diagnostics.insert(key.into(), value.into());
        self
    }

    pub fn row(&mut self, label: impl Into<String>, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.results.push(Row {
            label: label.into(),
            values,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn write_record(rec: &OutputRecord, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rec)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["label".to_string()];
            header.extend(rec.columns.iter().cloned());
            w.write_record(&header)?;
            for row in &rec.results {
                let mut fields = vec![row.label.clone()];
                // `Debug` for f64 is the shortest round-trip form
                fields.extend(row.values.iter().map(|v| format!("{v:?}")));
                w.write_record(&fields)?;
            }
            w.flush()
        }
    }
}
