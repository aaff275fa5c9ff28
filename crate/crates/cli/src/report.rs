//! Deterministic tabular output.
//!
//! CSV: a `# schema=1` line, `# key=value` lines for scalars, then a header
//! and the rows. JSON: one object holding `schema`, the scalars, and every
//! column as an array. Floats are always written with 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{Map, Value};

pub const SCHEMA: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub scalars: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn scalar(&mut self, key: &str, v: impl Into<Cell>) -> &mut Self {
        self.scalars.push((key.to_string(), v.into()));
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.scalars.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# schema={SCHEMA}")?;
        for (k, v) in &self.scalars {
            writeln!(w, "# {k}={}", v.csv())?;
        }
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(&self.columns)?;
        for r in &self.rows {
            out.write_record(r.iter().map(Cell::csv))?;
        }
        let bytes = out.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        w.write_all(&bytes)
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), Value::from(SCHEMA));
        for (k, v) in &self.scalars {
            m.insert(k.clone(), v.json());
        }
        for (j, c) in self.columns.iter().enumerate() {
            m.insert(c.clone(), Value::Array(self.rows.iter().map(|r| r[j].json()).collect()));
        }
        Value::Object(m)
    }

    pub fn write_json<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        let mut ser = serde_json::Serializer::with_formatter(&mut *w, Sig17);
        self.to_json().serialize(&mut ser).map_err(io::Error::from)?;
        writeln!(w)
    }
}

/// Compact JSON with 17-significant-digit floats.
struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new(&["t", "trace"]);
        r.scalar("domain", "disk").scalar("eps", 1e-12);
        r.row(vec![0.1.into(), (1.0 / 3.0).into()]);
        r.row(vec![0.2.into(), Cell::Empty]);
        r
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "# schema=1\n# domain=disk\n# eps=9.9999999999999998e-13\nt,trace\n\
             1.0000000000000001e-1,3.3333333333333331e-1\n2.0000000000000001e-1,\n"
        );
    }

    #[test]
    fn json_round_trips_values() {
        let mut buf = Vec::new();
        sample().write_json(&mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["trace"][0].as_f64().unwrap(), 1.0 / 3.0);
        assert!(v["trace"][1].is_null());
        assert!(String::from_utf8(buf).unwrap().contains("3.3333333333333331e-1"));
    }
}
