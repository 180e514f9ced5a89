//! The bundle document: input schema plus ordered ops with inline state.

use serde_json::{Map, Value as Json};

use crate::doc::{schema_from_json, schema_to_json, stage_from_json, stage_to_json};
use crate::error::ValidationError;
use crate::ops::{infer_chain, Signature, StageDef};
use crate::schema::Schema;
use crate::state::FittedState;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManifestError {
    #[error("malformed bundle document: {0}")]
    Parse(String),
    #[error("unsupported version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(String),
    #[error("op `{op}` is missing its fitted state")]
    MissingAsset { op: String },
    #[error("op `{op}`: invalid state: {message}")]
    InvalidState { op: String, message: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleOp {
    pub stage: StageDef,
    pub state: Option<FittedState>,
}

/// A fitted pipeline in portable form. Ops are in execution order.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleManifest {
    pub inputs: Schema,
    pub ops: Vec<BundleOp>,
}

impl BundleManifest {
    pub fn to_json(&self) -> Json {
        let ops = self
            .ops
            .iter()
            .map(|op| {
                let mut map = stage_to_json(&op.stage);
                if let Some(state) = &op.state {
                    map.insert("state".into(), state.to_json());
                }
                Json::Object(map)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("formatVersion".into(), Json::from(FORMAT_VERSION));
        doc.insert("inputs".into(), schema_to_json(&self.inputs));
        doc.insert("ops".into(), Json::Array(ops));
        Json::Object(doc)
    }

    /// Serialized document: sorted keys, shortest round-trip floats, trailing
    /// newline. Identical manifests always produce identical bytes.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self, ManifestError> {
        let doc: Json = serde_json::from_str(text).map_err(|e| ManifestError::Parse(e.to_string()))?;
        Self::from_json(&doc)
    }

    pub fn from_json(doc: &Json) -> Result<Self, ManifestError> {
        let map = doc
            .as_object()
            .ok_or_else(|| ManifestError::Parse("top level must be an object".into()))?;
        match map.get("formatVersion") {
            Some(v) if v.as_u64() == Some(FORMAT_VERSION) => {}
            Some(v) => return Err(ManifestError::UnsupportedVersion(v.to_string())),
            None => return Err(ManifestError::Parse("missing `formatVersion`".into())),
        }
        if let Some(k) = map.keys().find(|k| !["formatVersion", "inputs", "ops"].contains(&k.as_str())) {
            return Err(ManifestError::Parse(format!("unknown field `{k}`")));
        }
        let inputs = schema_from_json(map.get("inputs").ok_or_else(|| ManifestError::Parse("missing `inputs`".into()))?)
            .map_err(ManifestError::Parse)?;
        let raw_ops = map
            .get("ops")
            .and_then(Json::as_array)
            .ok_or_else(|| ManifestError::Parse("`ops` must be a list".into()))?;
        let mut ops = Vec::with_capacity(raw_ops.len());
        for (i, raw) in raw_ops.iter().enumerate() {
            let stage = stage_from_json(raw, i, &["state"])?;
            let kind = stage.op.kind();
            let state = match raw.get("state") {
                None if kind.is_estimator() => {
                    return Err(ManifestError::MissingAsset { op: stage.name })
                }
                None => None,
                Some(s) => Some(FittedState::from_json(kind, s).map_err(|message| {
                    ManifestError::InvalidState {
                        op: stage.name.clone(),
                        message,
                    }
                })?),
            };
            ops.push(BundleOp { stage, state });
        }
        Ok(BundleManifest { inputs, ops })
    }

    /// Infers every op's signature in order; the final schema holds inputs
    /// and all outputs.
    pub fn signatures(&self) -> Result<(Schema, Vec<Signature>), ValidationError> {
        infer_chain(
            &self.inputs,
            self.ops.iter().map(|op| (&op.stage, op.state.as_ref())),
        )
    }
}
