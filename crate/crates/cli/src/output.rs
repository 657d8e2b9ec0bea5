//! Report rendering: JSON with 17 significant digits, CSV tables, plain check lines.

use anyhow::Result;
use serde_json::{Map, Number, Value};
use std::io::Write;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// JSON number printed as `{:.16e}`; non-finite values become null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format!("{x:.16e}")).expect("valid float literal"))
    } else {
        Value::Null
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

pub fn cell(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Two-column table from named values.
    pub fn quantities(pairs: &[(&str, f64)]) -> Self {
        let mut t = Table::new(&["quantity", "value"]);
        for (k, v) in pairs {
            t.push(vec![k.to_string(), cell(*v)]);
        }
        t
    }
}

pub struct Report {
    pub json: Value,
    pub table: Table,
    pub default_format: Format,
}

impl Report {
    pub fn json_first(json: Value, table: Table) -> Self {
        Report { json, table, default_format: Format::Json }
    }

    pub fn csv_first(json: Value, table: Table) -> Self {
        Report { json, table, default_format: Format::Csv }
    }

    pub fn write<W: Write>(&self, format: Option<Format>, out: W) -> Result<()> {
        match format.unwrap_or(self.default_format) {
            Format::Json => write_json(&self.json, out),
            Format::Csv => write_csv(&self.table, out),
        }
    }
}

pub fn write_json<W: Write>(v: &Value, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_csv<W: Write>(t: &Table, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&t.header)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Object header shared by every JSON report.
pub fn head(command: &str, n: usize, s: f64, alpha: f64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), Value::from(command));
    m.insert("n".into(), Value::from(n));
    m.insert("s".into(), num(s));
    m.insert("alpha".into(), num(alpha));
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(5.0).to_string(), "5.0000000000000000e+0");
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(f64::NAN), Value::Null);
        let back: f64 = num(std::f64::consts::PI).as_f64().unwrap();
        assert_eq!(back, std::f64::consts::PI);
        assert_eq!(cell(f64::NAN), "NaN");
    }
}
