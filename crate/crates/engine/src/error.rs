use featherpipe_core::error::{ErrorKind, SchemaError, ValidationError};
use featherpipe_core::manifest::ManifestError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("spec parse error at line {line}, column {column}: {message}")]
    SpecParse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid pipeline: {0}")]
    Validation(#[from] ValidationError),
    #[error("cycle in pipeline graph through stage `{stage}`")]
    Cycle { stage: String },
    #[error("stage `{stage}`: EmptyVocabulary: no non-null, non-mask values observed")]
    EmptyVocabulary { stage: String },
    #[error("stage `{stage}`: AllMissing: {message}")]
    AllMissing { stage: String, message: String },
    #[error("stage `{stage}`, column `{column}`, partition {partition}, row {row}: {kind}: {message}")]
    Transform {
        stage: String,
        column: String,
        partition: usize,
        row: usize,
        kind: ErrorKind,
        message: String,
    },
    #[error("input data: {0}")]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
}

impl EngineError {
    /// The value-level error kind, for transform failures.
    pub fn op_kind(&self) -> Option<ErrorKind> {
        match self {
            EngineError::Transform { kind, .. } => Some(*kind),
            _ => None,
        }
    }
}
