//! Rectangular result tables and their CSV form.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Complex(Complex64),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<Complex64> for Value {
    fn from(v: Complex64) -> Self {
        Value::Complex(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub config_hash: String,
    pub tool_version: String,
    pub experiment: String,
}

impl Metadata {
    pub fn new(config_hash: &str, experiment: &str) -> Self {
        Metadata {
            config_hash: config_hash.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    columns: Vec<(String, ColumnKind)>,
    rows: Vec<Vec<Value>>,
    pub metadata: Metadata,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[(&str, ColumnKind)], metadata: Metadata) -> Self {
        ResultTable {
            name: name.to_string(),
            columns: columns.iter().map(|(n, k)| (n.to_string(), *k)).collect(),
            rows: Vec::new(),
            metadata,
        }
    }

    /// Appends a row; it must match the declared columns and be finite.
    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Value(format!(
                "table {} expects {} values per row, got {}",
                self.name,
                self.columns.len(),
                row.len()
            )));
        }
        for ((name, kind), v) in self.columns.iter().zip(&row) {
            let (ok_kind, finite) = match v {
                Value::Real(x) => (*kind == ColumnKind::Real, x.is_finite()),
                Value::Complex(z) => (*kind == ColumnKind::Complex, z.re.is_finite() && z.im.is_finite()),
            };
            if !ok_kind {
                return Err(Error::Value(format!("column {name} of table {} has the wrong kind", self.name)));
            }
            if !finite {
                return Err(Error::Convergence(format!(
                    "non-finite value in column {name} of table {}",
                    self.name
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    /// Header with complex columns expanded into `_re`/`_im` pairs.
    pub fn header(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, kind) in &self.columns {
            match kind {
                ColumnKind::Real => out.push(name.clone()),
                ColumnKind::Complex => {
                    out.push(format!("{name}_re"));
                    out.push(format!("{name}_im"));
                }
            }
        }
        out
    }

    /// Real values of one column (or the real parts of a complex column).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|(n, _)| n == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[idx] {
                    Value::Real(x) => x,
                    Value::Complex(z) => z.re,
                })
                .collect(),
        )
    }

    pub fn complex_column(&self, name: &str) -> Option<Vec<Complex64>> {
        let idx = self.columns.iter().position(|(n, _)| n == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[idx] {
                    Value::Real(x) => Complex64::new(x, 0.0),
                    Value::Complex(z) => z,
                })
                .collect(),
        )
    }
}

fn format_number(x: f64, precision: usize) -> String {
    format!("{:.*e}", precision.saturating_sub(1), x)
}

/// Writes `table` as CSV to `path` and its metadata to `path` with a
/// `.meta.json` extension.
pub fn emit_csv(table: &ResultTable, path: &Path, precision: usize) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer.write_record(table.header()).map_err(|e| csv_error(path, e))?;
    for row in &table.rows {
        let mut fields = Vec::new();
        for v in row {
            match v {
                Value::Real(x) => fields.push(format_number(*x, precision)),
                Value::Complex(z) => {
                    fields.push(format_number(z.re, precision));
                    fields.push(format_number(z.im, precision));
                }
            }
        }
        writer.write_record(&fields).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    let meta_path = path.with_extension("meta.json");
    let json = serde_json::to_string_pretty(&table.metadata)
        .map_err(|e| Error::Value(format!("metadata serialization: {e}")))?;
    fs::write(&meta_path, json + "\n").map_err(|e| Error::io(&meta_path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Value(format!("{}: {other:?}", path.display())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new(
            "demo",
            &[("t", ColumnKind::Real), ("a", ColumnKind::Complex)],
            Metadata::new("abc", "decay"),
        );
        t.push(vec![0.1.into(), Complex64::new(1.0 / 3.0, -2e-300).into()]).unwrap();
        t.push(vec![2.0.into(), Complex64::new(-7.5, 1e10).into()]).unwrap();
        t
    }

    #[test]
    fn round_trip_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demo.csv");
        let table = sample();
        emit_csv(&table, &path, 17).unwrap();
        let mut reader = csv::Reader::from_path(&path).unwrap();
        assert_eq!(reader.headers().unwrap(), vec!["t", "a_re", "a_im"]);
        let back: Vec<Vec<f64>> = reader
            .records()
            .map(|r| r.unwrap().iter().map(|f| f.parse().unwrap()).collect())
            .collect();
        assert_eq!(back[0], vec![0.1, 1.0 / 3.0, -2e-300]);
        assert_eq!(back[1], vec![2.0, -7.5, 1e10]);
        assert!(path.with_extension("meta.json").exists());
    }

    #[test]
    fn rejects_ragged_and_nan_rows() {
        let mut t = sample();
        assert!(t.push(vec![1.0.into()]).is_err());
        assert!(matches!(
            t.push(vec![f64::NAN.into(), Complex64::new(0.0, 0.0).into()]),
            Err(Error::Convergence(_))
        ));
        assert!(t.push(vec![Complex64::new(0.0, 0.0).into(), 1.0.into()]).is_err());
    }

    #[test]
    fn reports_unwritable_path() {
        let r = emit_csv(&sample(), Path::new("/nonexistent-dir/x.csv"), 17);
        assert!(matches!(r, Err(Error::Io { .. })));
    }
}
