//! Report rendering: a reproducibility header followed by CSV or JSON.

use std::io::Write;

use intentir::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<(String, String)>,
}

impl Header {
    pub fn new(command: &str, seed: u64, config: &impl Serialize) -> Result<Self> {
        let canonical = serde_json::to_vec(config)?;
        Ok(Header {
            tool: "intentir",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            config_sha256: hex::encode(Sha256::digest(&canonical)),
            notes: Vec::new(),
        })
    }

    pub fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.notes.push((key.to_string(), value.to_string()));
        self
    }

    /// `#` comment lines, skipped by every reader in the toolkit.
    pub fn comment_lines(&self) -> String {
        let mut s = format!(
            "# {} {}\n# command: {}\n# seed: {}\n# config_sha256: {}\n",
            self.tool, self.version, self.command, self.seed, self.config_sha256
        );
        for (k, v) in &self.notes {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s
    }
}

pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: ToString>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.6}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn write_report<W: Write>(
    mut w: W,
    format: Format,
    header: &Header,
    table: &Table,
    json: &impl Serialize,
) -> Result<()> {
    match format {
        Format::Csv => {
            w.write_all(header.comment_lines().as_bytes())?;
            let mut out = csv::Writer::from_writer(&mut w);
            out.write_record(&table.columns).map_err(csv_error)?;
            for row in &table.rows {
                out.write_record(row).map_err(csv_error)?;
            }
            out.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a, T> {
                header: &'a Header,
                report: &'a T,
            }
            serde_json::to_writer_pretty(&mut w, &Doc { header, report: json })?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}
