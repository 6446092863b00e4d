//! Deterministic JSON and CSV emission.

use serde_json::{json, Value};

use crate::config::{canonical, Config, Mode};
use crate::error::{Error, Result};

/// Finite values in `{:.16e}` form (17 significant digits), `+inf` as the
/// token `"inf"`.
pub fn real_value(x: f64) -> Value {
    if x.is_infinite() && x > 0.0 {
        Value::String("inf".into())
    } else if x.is_infinite() {
        Value::String("-inf".into())
    } else if x.is_nan() {
        Value::String("nan".into())
    } else {
        Value::String(format!("{:.16e}", x + 0.0))
    }
}

pub fn parse_real(v: &Value) -> Option<f64> {
    match v {
        Value::String(s) if s == "inf" => Some(f64::INFINITY),
        Value::String(s) if s == "-inf" => Some(f64::NEG_INFINITY),
        Value::String(s) => s.parse().ok(),
        Value::Number(n) => n.as_f64(),
        _ => None,
    }
}

/// Pretty JSON with recursively sorted keys and a trailing newline.
pub fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&canonical(v)).expect("values serialize");
    s.push('\n');
    s
}

/// Flat table for CSV output.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Numeric(format!("csv output failed: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numeric(format!("csv output failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }
}

/// Cell text for a real number, matching the JSON token.
pub fn cell(x: f64) -> String {
    match real_value(x) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

/// Run manifest embedded in every report. Wall time lives in a sidecar file.
pub fn manifest(cfg: &Config, mode: Mode, seed: u64, epsilon: f64, quadrature_errors: Value) -> Value {
    json!({
        "config_digest": cfg.digest,
        "mode": mode.as_str(),
        "seed": seed,
        "epsilon": real_value(epsilon),
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.to_json(),
        "quadrature_errors": quadrature_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_tokens() {
        assert_eq!(real_value(f64::INFINITY), json!("inf"));
        assert_eq!(real_value(0.1), json!("1.0000000000000001e-1"));
        for x in [0.1, 1.0 / 3.0, 2.5e-300, -7.0, f64::INFINITY] {
            assert_eq!(parse_real(&real_value(x)), Some(x));
        }
    }

    #[test]
    fn json_text_sorts_keys() {
        let a = to_json_text(&json!({"b": 1, "a": {"y": 2, "x": 3}}));
        let b = to_json_text(&json!({"a": {"x": 3, "y": 2}, "b": 1}));
        assert_eq!(a, b);
        assert!(a.find("\"a\"").unwrap() < a.find("\"b\"").unwrap());
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = Table::new("t", &["name", "value"]);
        t.push(vec!["a,b".into(), cell(1.5)]);
        assert_eq!(t.to_csv().unwrap(), "name,value\n\"a,b\",1.5000000000000000e0\n");
    }
}
