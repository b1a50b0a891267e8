//! CSV and JSON emission to a file or stdout.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A flat record: ordered key/value pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Value)>);

impl Record {
    /// Appends `key`, or replaces its value if already present.
    pub fn push(&mut self, key: &str, value: impl Into<Value>) {
        let value = value.into();
        match self.0.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.0.push((key.to_string(), value)),
        }
    }

    /// Adds the top-level scalar fields of `item` whose keys are not yet present.
    pub fn extend_scalars<T: Serialize>(&mut self, item: &T) {
        if let Ok(Value::Object(map)) = serde_json::to_value(item) {
            for (k, v) in map {
                if !(v.is_array() || v.is_object()) && !self.0.iter().any(|(have, _)| *have == k) {
                    self.0.push((k, v));
                }
            }
        }
    }

    fn to_json(&self) -> Value {
        Value::Object(self.0.iter().cloned().collect::<Map<_, _>>())
    }

    fn keys(&self) -> Vec<&str> {
        self.0.iter().map(|(k, _)| k.as_str()).collect()
    }

    fn cells(&self) -> Vec<String> {
        self.0.iter().map(|(_, v)| cell(v)).collect()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Output destination; stdout unless a path is given.
pub struct Sink {
    path: Option<PathBuf>,
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            )),
            None => Box::new(io::stdout().lock()),
        };
        Ok(Sink {
            path: path.map(Path::to_path_buf),
            out,
        })
    }

    fn describe(&self) -> String {
        self.path
            .as_ref()
            .map_or_else(|| "stdout".to_string(), |p| p.display().to_string())
    }

    /// Rows sharing the key order of the first row.
    pub fn records(&mut self, format: Format, rows: &[Record]) -> Result<()> {
        let dest = self.describe();
        match format {
            Format::Json => {
                let arr = Value::Array(rows.iter().map(Record::to_json).collect());
                self.json(&arr)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut self.out);
                if let Some(first) = rows.first() {
                    w.write_record(first.keys())
                        .with_context(|| format!("writing {dest}"))?;
                }
                for r in rows {
                    w.write_record(r.cells())
                        .with_context(|| format!("writing {dest}"))?;
                }
                w.flush().with_context(|| format!("writing {dest}"))?;
            }
        }
        self.finish()
    }

    /// One record: a JSON object, or a CSV header plus one row.
    pub fn record(&mut self, format: Format, record: &Record) -> Result<()> {
        match format {
            Format::Json => {
                self.json(&record.to_json())?;
                self.finish()
            }
            Format::Csv => self.records(format, std::slice::from_ref(record)),
        }
    }

    /// Serialisable rows as CSV.
    pub fn serialized_csv<T: Serialize>(&mut self, rows: &[T]) -> Result<()> {
        let dest = self.describe();
        {
            let mut w = csv::Writer::from_writer(&mut self.out);
            for r in rows {
                w.serialize(r).with_context(|| format!("writing {dest}"))?;
            }
            w.flush().with_context(|| format!("writing {dest}"))?;
        }
        self.finish()
    }

    pub fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let dest = self.describe();
        serde_json::to_writer_pretty(&mut self.out, value)
            .with_context(|| format!("writing {dest}"))?;
        writeln!(self.out).with_context(|| format!("writing {dest}"))?;
        Ok(())
    }

    pub fn text(&mut self, text: &str) -> Result<()> {
        let dest = self.describe();
        self.out
            .write_all(text.as_bytes())
            .with_context(|| format!("writing {dest}"))?;
        self.finish()
    }

    fn finish(&mut self) -> Result<()> {
        let dest = self.describe();
        self.out.flush().with_context(|| format!("writing {dest}"))
    }
}

impl Drop for Sink {
    fn drop(&mut self) {
        let _ = self.out.flush();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_keys_are_unique() {
        let mut r = Record::default();
        r.push("a", 1);
        r.push("b", "x");
        r.push("a", 2);
        #[derive(Serialize)]
        struct S {
            a: u8,
            c: Option<u8>,
            v: Vec<u8>,
        }
        r.extend_scalars(&S {
            a: 9,
            c: None,
            v: vec![1],
        });
        assert_eq!(r.keys(), ["a", "b", "c"]);
        assert_eq!(r.cells(), ["2", "x", ""]);
    }
}
