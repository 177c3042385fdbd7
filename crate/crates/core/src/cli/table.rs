//! Column-named tables and their CSV/JSON encodings.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// Sentinel written in place of a cost that has no feasible generator.
pub const INFEASIBLE: &str = "infeasible";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn infeasible() -> Self {
        Cell::Text(INFEASIBLE.to_string())
    }

    pub fn flag(b: bool) -> Self {
        Cell::Text(if b { "true" } else { "false" }.to_string())
    }

    pub fn or_infeasible(v: Option<f64>) -> Self {
        v.filter(|x| x.is_finite()).map_or_else(Cell::infeasible, Cell::Num)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn parse(field: &str) -> Self {
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Num(v),
            _ => Cell::Text(field.to_string()),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // 17 significant digits round-trip every f64
            Cell::Num(v) => write!(f, "{v:.16e}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row} has {got} fields, expected {expected}")]
    Width { row: usize, got: usize, expected: usize },
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; text cells are skipped.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        self.column(name).map_or_else(Vec::new, |j| self.rows.iter().filter_map(|r| r[j].as_f64()).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TableError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TableError> {
        let mut r = csv::Reader::from_reader(input);
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != columns.len() {
                return Err(TableError::Width { row: i + 1, got: rec.len(), expected: columns.len() });
            }
            rows.push(rec.iter().map(Cell::parse).collect());
        }
        Ok(Self { columns, rows })
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("tables serialize");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Self, TableError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn encode(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv_string(),
            Format::Json => self.to_json_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentinel_and_flags() {
        let mut t = Table::new(["a", "b", "ok"]);
        t.push(vec![Cell::Num(0.1), Cell::or_infeasible(None), Cell::flag(true)]);
        t.push(vec![Cell::Num(-3.0), Cell::or_infeasible(Some(f64::INFINITY)), Cell::flag(false)]);
        let csv = t.to_csv_string();
        assert_eq!(csv.lines().next(), Some("a,b,ok"));
        assert!(csv.contains("1.0000000000000001e-1,infeasible,true\n"));
        assert!(!csv.contains('\r'));
        assert_eq!(Table::read_csv(csv.as_bytes()).unwrap(), t);
        assert_eq!(t.numbers("a"), vec![0.1, -3.0]);
        assert!(t.numbers("b").is_empty());
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = Table::read_csv("a,b\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TableError::Csv(_) | TableError::Width { .. }));
    }
}
