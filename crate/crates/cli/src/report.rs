//! Report envelope and canonical JSON output.

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub input: Value,
    pub payload: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, input: Value, payload: Value, warnings: Vec<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            input,
            payload,
            warnings,
        }
    }

    /// Sorted keys, floats rounded to 12 significant digits, trailing newline.
    pub fn to_canonical_json(&self) -> anyhow::Result<String> {
        let v = canonical(serde_json::to_value(self)?);
        let mut s = serde_json::to_string_pretty(&v)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or_else(|e| json!({ "serialization_error": e.to_string() }))
}

fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// serde_json's default map is ordered, so rebuilding the tree sorts keys.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round12(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(
            o.into_iter()
                .map(|(k, v)| (k, canonical(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(2.0f64.sqrt() * 1e8), 141421356.237);
        assert_eq!(round12(-1.0e-300), -1.0e-300);
        assert_eq!(round12(0.0), 0.0);
    }

    #[test]
    fn keys_are_sorted() {
        let v = canonical(json!({"b": 1, "a": {"d": 2.0000000000001, "c": null}}));
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"a":{"c":null,"d":2.0},"b":1}"#
        );
    }
}
