//! Document form of stages and input schemas, shared by pipeline specs and
//! bundles.

use serde_json::{Map, Value as Json};

use crate::error::{ValidationError, ValidationKind};
use crate::ops::{Op, OpKind, StageDef};
use crate::schema::{DType, Schema};

const STAGE_KEYS: [&str; 5] = ["name", "op", "inputs", "outputs", "params"];

fn names(json: Option<&Json>, key: &str) -> Result<Vec<String>, String> {
    json.ok_or_else(|| format!("missing `{key}`"))?
        .as_array()
        .ok_or_else(|| format!("`{key}` must be a list of column names"))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| format!("`{key}` must be a list of column names"))
        })
        .collect()
}

/// Parses one stage object. `extra` lists additional keys the caller handles
/// itself; any other unknown key is rejected.
pub fn stage_from_json(json: &Json, position: usize, extra: &[&str]) -> Result<StageDef, ValidationError> {
    let fallback = format!("#{position}");
    let map = json.as_object().ok_or_else(|| {
        ValidationError::new(&fallback, ValidationKind::InvalidParams, "stage must be an object")
    })?;
    let name = match map.get("name") {
        Some(Json::String(s)) if !s.is_empty() => s.clone(),
        _ => {
            return Err(ValidationError::new(
                &fallback,
                ValidationKind::InvalidParams,
                "stage needs a non-empty string `name`",
            ))
        }
    };
    let err = |kind, message: String| ValidationError::new(&name, kind, message);
    if let Some(k) = map
        .keys()
        .find(|k| !STAGE_KEYS.contains(&k.as_str()) && !extra.contains(&k.as_str()))
    {
        return Err(err(ValidationKind::InvalidParams, format!("unknown stage field `{k}`")));
    }
    let kind: OpKind = map
        .get("op")
        .and_then(Json::as_str)
        .ok_or_else(|| err(ValidationKind::UnknownOp, "missing string field `op`".into()))?
        .parse()
        .map_err(|e| err(ValidationKind::UnknownOp, e))?;
    let inputs = names(map.get("inputs"), "inputs").map_err(|e| err(ValidationKind::InvalidParams, e))?;
    let outputs = names(map.get("outputs"), "outputs").map_err(|e| err(ValidationKind::InvalidParams, e))?;
    let mut params = match map.get("params") {
        None => Map::new(),
        Some(Json::Object(p)) => p.clone(),
        Some(_) => return Err(err(ValidationKind::InvalidParams, "`params` must be an object".into())),
    };
    let input_dtype = match params.remove("inputDtype") {
        None => None,
        Some(Json::String(s)) => Some(
            s.parse::<DType>()
                .map_err(|e| err(ValidationKind::InvalidParams, format!("inputDtype: {e}")))?,
        ),
        Some(other) => {
            return Err(err(
                ValidationKind::InvalidParams,
                format!("inputDtype must be a dtype name, got {other}"),
            ))
        }
    };
    let op = Op::from_params(kind, &params).map_err(|(k, m)| err(k, format!("{kind}: {m}")))?;
    Ok(StageDef {
        name,
        op,
        inputs,
        outputs,
        input_dtype,
    })
}

pub fn stage_to_json(stage: &StageDef) -> Map<String, Json> {
    let mut params = stage.op.params();
    if let Some(d) = stage.input_dtype {
        params.insert("inputDtype".into(), Json::from(d.name()));
    }
    let mut map = Map::new();
    map.insert("name".into(), Json::from(stage.name.clone()));
    map.insert("op".into(), Json::from(stage.op.kind().name()));
    map.insert("inputs".into(), Json::from(stage.inputs.clone()));
    map.insert("outputs".into(), Json::from(stage.outputs.clone()));
    map.insert("params".into(), Json::Object(params));
    map
}

/// Parses a list of `{name, dtype, shape}` objects. Input fields must have
/// fixed shapes.
pub fn schema_from_json(json: &Json) -> Result<Schema, String> {
    let schema: Schema = serde_json::from_value(json.clone()).map_err(|e| format!("inputs: {e}"))?;
    schema.require_fixed().map_err(|e| format!("inputs: {e}"))?;
    Ok(schema)
}

pub fn schema_to_json(schema: &Schema) -> Json {
    serde_json::to_value(schema).expect("schema serializes")
}
