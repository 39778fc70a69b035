//! Deterministic CSV / JSON emission of homogeneous record tables.

use std::io::Write;

use serde_json::{Map, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

/// Records sharing one column layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    /// Panics if the row does not match the column count.
    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "record does not match table columns");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }
}

/// Formats `x` with 12 significant digits, trailing zeros trimmed.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        format!("{}e{e}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Float(f) => format_float(*f),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::Str(s) => s.clone(),
    }
}

fn json_value(v: &Value) -> Json {
    match v {
        Value::Int(i) => Json::from(*i),
        Value::Float(f) => format_float(*f)
            .parse::<f64>()
            .ok()
            .and_then(serde_json::Number::from_f64)
            .map(Json::Number)
            .unwrap_or(Json::Null),
        Value::Str(s) => Json::from(s.as_str()),
        Value::Bool(b) => Json::from(*b),
    }
}

/// Writes `table` as CSV (header plus one line per record) or as a JSON
/// object `{"meta": {...}, "records": [...]}`. Metadata is only carried by
/// the JSON form.
pub fn emit(table: &Table, meta: &[(&str, Value)], format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{}", table.columns.join(","))?;
            for row in &table.rows {
                let fields: Vec<String> = row.iter().map(csv_field).collect();
                writeln!(out, "{}", fields.join(","))?;
            }
        }
        Format::Json => {
            let meta: Map<String, Json> = meta.iter().map(|(k, v)| (k.to_string(), json_value(v))).collect();
            let records: Vec<Json> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Json> = table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), json_value(v)))
                        .collect();
                    Json::Object(obj)
                })
                .collect();
            let mut doc = Map::new();
            doc.insert("meta".into(), Json::Object(meta));
            doc.insert("records".into(), Json::Array(records));
            serde_json::to_writer_pretty(&mut *out, &Json::Object(doc))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(t: &Table, f: Format) -> String {
        let mut buf = Vec::new();
        emit(t, &[("seed", Value::Int(3))], f, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn header_only_when_empty() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(render(&t, Format::Csv), "a,b\n");
    }

    #[test]
    fn one_record_two_lines() {
        let mut t = Table::new(&["name", "x", "n"]);
        t.push(vec!["q".into(), 0.1f64.into(), 4usize.into()]);
        assert_eq!(render(&t, Format::Csv), "name,x,n\nq,0.1,4\n");
    }

    #[test]
    fn repeated_emission_is_identical() {
        let mut t = Table::new(&["x"]);
        t.push(vec![std::f64::consts::PI.into()]);
        assert_eq!(render(&t, Format::Json), render(&t, Format::Json));
        assert_eq!(render(&t, Format::Csv), render(&t, Format::Csv));
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_float(0.961), "0.961");
        assert_eq!(format_float(-2.0), "-2");
        assert_eq!(format_float(1.0 / 3.0 * 1e-7), "3.33333333333e-8");
        assert_eq!(format_float(123456789012345678.0), "1.23456789012e17");
        assert_eq!(format_float(0.0), "0");
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new(&["k", "v"]);
        t.push(vec!["a".into(), 0.5f64.into()]);
        let doc: Json = serde_json::from_str(&render(&t, Format::Json)).unwrap();
        assert_eq!(doc["meta"]["seed"], 3);
        assert_eq!(doc["records"][0]["v"], 0.5);
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new(&["s"]);
        t.push(vec!["a,b".into()]);
        assert_eq!(render(&t, Format::Csv), "s\n\"a,b\"\n");
    }

    #[test]
    #[should_panic]
    fn ragged_rows_rejected() {
        Table::new(&["a", "b"]).push(vec![1usize.into()]);
    }
}
