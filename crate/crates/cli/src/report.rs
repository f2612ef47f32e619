//! Newline-delimited JSON reports.
//!
//! Every record is one JSON object on its own line with a `"type"` field.
//! Each command emits exactly one `"summary"` record, last. Non-finite reals
//! are written as `null`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Map, Value};

pub struct Reporter {
    out: Box<dyn Write>,
    summaries: usize,
}

impl Reporter {
    pub fn stdout() -> Self {
        Reporter {
            out: Box::new(BufWriter::new(io::stdout())),
            summaries: 0,
        }
    }

    pub fn to_file(path: &Path) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Reporter {
            out: Box::new(BufWriter::new(file)),
            summaries: 0,
        })
    }

    /// Reports go to `path` when given, otherwise to stdout.
    pub fn open(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::to_file(p),
            None => Ok(Self::stdout()),
        }
    }

    pub fn into_writer(self) -> Box<dyn Write> {
        self.out
    }

    /// Writes `{"type": kind, ...fields}`.
    pub fn record(&mut self, kind: &str, fields: Value) -> Result<()> {
        let mut object = Map::new();
        object.insert("type".into(), Value::String(kind.into()));
        if let Value::Object(map) = fields {
            object.extend(map);
        }
        serde_json::to_writer(&mut self.out, &Value::Object(object))?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn summary(&mut self, fields: Value) -> Result<()> {
        anyhow::ensure!(self.summaries == 0, "summary already emitted");
        self.summaries += 1;
        self.record("summary", fields)?;
        self.out.flush()?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}
