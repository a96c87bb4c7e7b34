//! Plot-ready result tables with CSV and JSON renderings.
//!
//! Reals are written to CSV with 17 significant digits, which round-trips
//! every `f64`; the JSON rendering carries the same `f64` values.

use std::io::Write;

use serde_json::{Map, Value};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Real(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

/// `x` with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Rows of `(parameters.., computed, reference, ratio, extras..)` plus
/// run metadata. Tables built with [`SweepTable::comparison`] maintain
/// `ratio = computed / reference` whenever the reference is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub metadata: Map<String, Value>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    params: usize,
}

impl SweepTable {
    /// Free-form table.
    pub fn new(columns: &[&str]) -> Self {
        SweepTable {
            metadata: Map::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            params: columns.len(),
        }
    }

    /// Comparison table: `params`, then `computed, reference, ratio`, then
    /// `extras`.
    pub fn comparison(params: &[&str], extras: &[&str]) -> Self {
        let mut columns: Vec<String> = params.iter().map(|c| c.to_string()).collect();
        columns.extend(["computed", "reference", "ratio"].map(String::from));
        columns.extend(extras.iter().map(|c| c.to_string()));
        SweepTable { metadata: Map::new(), columns, rows: Vec::new(), params: params.len() }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn push_comparison(
        &mut self,
        params: Vec<Cell>,
        computed: f64,
        reference: Option<f64>,
        extras: Vec<Cell>,
    ) {
        assert_eq!(params.len(), self.params, "parameter count");
        let ratio = reference.filter(|&r| r != 0.0).map(|r| computed / r);
        let mut row = params;
        row.extend([Cell::Real(computed), reference.into(), ratio.into()]);
        row.extend(extras);
        self.push(row);
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    self.columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::json))
                        .collect(),
                )
            })
            .collect();
        let mut obj = Map::new();
        obj.insert("metadata".into(), Value::Object(self.metadata.clone()));
        obj.insert("columns".into(), Value::from(self.columns.clone()));
        obj.insert("rows".into(), Value::Array(rows));
        Value::Object(obj)
    }

    pub fn write_json(&self, mut out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json()).map_err(std::io::Error::from)?;
        writeln!(out)?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}
