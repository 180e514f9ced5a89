//! JSON codec for cells and rows.
//!
//! Floats are written as shortest round-trip numbers; the non-finite values
//! that JSON cannot express are written as the strings `"NaN"`,
//! `"Infinity"` and `"-Infinity"`.

use serde_json::{Map, Number, Value as Json};

use crate::schema::{DType, Dim, FieldSpec, Schema};
use crate::value::{f64_to_i64, parse_f64, render_f64, Value};

pub fn f64_to_json(x: f64) -> Json {
    match Number::from_f64(x) {
        Some(n) => Json::Number(n),
        None => Json::String(render_f64(x)),
    }
}

pub fn f64_from_json(json: &Json) -> Option<f64> {
    match json {
        Json::Number(n) => n.as_f64(),
        Json::String(s) if matches!(s.as_str(), "NaN" | "Infinity" | "-Infinity") => parse_f64(s),
        _ => None,
    }
}

pub fn value_to_json(value: &Value) -> Json {
    match value {
        Value::Null => Json::Null,
        Value::Int(i) => Json::from(*i),
        Value::Float(x) => f64_to_json(*x),
        Value::Bool(b) => Json::Bool(*b),
        Value::Str(s) => Json::String(s.clone()),
        Value::List(items) => Json::Array(items.iter().map(value_to_json).collect()),
    }
}

/// Decodes a cell for `field`, checking dtype and list lengths.
pub fn value_from_json(json: &Json, field: &FieldSpec) -> Result<Value, String> {
    decode(json, field.dtype, field.shape.dims())
}

fn decode(json: &Json, dtype: DType, dims: &[Dim]) -> Result<Value, String> {
    if json.is_null() {
        return Ok(Value::Null);
    }
    if let Some((dim, rest)) = dims.split_first() {
        let items = json
            .as_array()
            .ok_or_else(|| format!("expected a list, got {json}"))?;
        if let Dim::Fixed(n) = dim {
            if items.len() != *n {
                return Err(format!("expected a list of length {n}, got {}", items.len()));
            }
        }
        return items
            .iter()
            .map(|item| decode(item, dtype, rest))
            .collect::<Result<Vec<_>, _>>()
            .map(Value::List);
    }
    let mismatch = || format!("expected {dtype}, got {json}");
    match dtype {
        DType::Int64 => match json {
            Json::Number(n) => match n.as_i64() {
                Some(i) => Ok(Value::Int(i)),
                None => n
                    .as_f64()
                    .and_then(|x| f64_to_i64(x).ok())
                    .map(Value::Int)
                    .ok_or_else(mismatch),
            },
            _ => Err(mismatch()),
        },
        DType::Float64 => f64_from_json(json).map(Value::Float).ok_or_else(mismatch),
        DType::Bool => json.as_bool().map(Value::Bool).ok_or_else(mismatch),
        DType::String => json.as_str().map(Value::str).ok_or_else(mismatch),
    }
}

pub fn row_to_json(schema: &Schema, row: &[Value]) -> Json {
    let map: Map<String, Json> = schema
        .fields()
        .iter()
        .zip(row)
        .map(|(f, v)| (f.name.clone(), value_to_json(v)))
        .collect();
    Json::Object(map)
}
