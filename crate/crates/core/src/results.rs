//! Tabular output. Floats are written in scientific notation with 10
//! significant digits and JSON keys are emitted in sorted order, so equal
//! inputs always give byte-identical files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NodeId;
use crate::outage::OutageReport;

pub const OUTAGE_HEADER: [&str; 7] = ["user_id", "mode", "p_out", "stderr", "n_samples", "threshold_db", "seed"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

/// One cell of an output table.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => fmt_float(*v),
            Cell::Float(v) => serde_json::Value::String(v.to_string()).to_string(),
            Cell::Text(s) => serde_json::Value::String(s.clone()).to_string(),
            Cell::Empty => "null".into(),
        }
    }
}

/// 10 significant digits in scientific notation.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.9e}")
}

/// Column names plus rows of cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Jsonl => self.write_jsonl(out),
        }
    }

    fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for row in &self.rows {
            let sorted: BTreeMap<&str, &Cell> = self.columns.iter().map(String::as_str).zip(row).collect();
            let body: Vec<String> = sorted
                .iter()
                .map(|(k, v)| format!("{}:{}", serde_json::Value::String(k.to_string()), v.json()))
                .collect();
            writeln!(out, "{{{}}}", body.join(","))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_string(&self, format: Format) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf, format)?;
        String::from_utf8(buf).map_err(|e| Error::Io(std::io::Error::other(e)))
    }

    pub fn save(&self, path: impl AsRef<Path>, format: Format) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(file), format)
    }
}

/// One row per user and mode.
pub fn outage_table(report: &OutageReport) -> Table {
    let mut t = Table::new(&OUTAGE_HEADER);
    for r in &report.rows {
        t.push(vec![
            Cell::Text(NodeId::User(r.user).to_string()),
            Cell::Text(r.mode.to_string()),
            Cell::Float(r.p_out),
            r.stderr.map_or(Cell::Empty, Cell::Float),
            Cell::Int(r.n_samples),
            Cell::Float(r.threshold_db),
            r.seed.map_or(Cell::Empty, Cell::Int),
        ]);
    }
    t
}

pub fn write_results(report: &OutageReport, path: impl AsRef<Path>, format: Format) -> Result<()> {
    outage_table(report).save(path, format)
}
