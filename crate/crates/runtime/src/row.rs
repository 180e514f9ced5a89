use std::collections::BTreeMap;

use featherpipe_core::error::ErrorKind;
use featherpipe_core::Value;

/// A row keyed by column name.
pub type Row = BTreeMap<String, Value>;

/// How unknown fields in an incoming row are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowMode {
    /// Extra fields are rejected.
    #[default]
    Strict,
    /// Extra fields are ignored.
    Lenient,
}

/// The row does not conform to the bundle's input schema.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("RowValidationError: {message}")]
pub struct RowValidationError {
    pub message: String,
}

impl RowValidationError {
    pub fn new(message: impl Into<String>) -> Self {
        RowValidationError {
            message: message.into(),
        }
    }
}

/// An op failed on a value.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("stage `{stage}`, column `{column}`: {kind}: {message}")]
pub struct ExecError {
    pub stage: String,
    pub column: String,
    pub kind: ErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RowError {
    #[error(transparent)]
    Validation(#[from] RowValidationError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}
