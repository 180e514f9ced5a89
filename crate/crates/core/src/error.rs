use std::fmt;

use serde::{Deserialize, Serialize};

/// Failure classes shared by the batch engine and the row runtime.
///
/// Both backends must report the same kind for the same bad input, so the
/// parity harness compares kinds rather than messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorKind {
    Coercion,
    Domain,
    DivideByZero,
    ShapeMismatch,
    DTypeMismatch,
    DateParse,
    Range,
    IndexOutOfRange,
    EmptyAggregate,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ErrorKind::Coercion => "CoercionError",
            ErrorKind::Domain => "DomainError",
            ErrorKind::DivideByZero => "DivideByZero",
            ErrorKind::ShapeMismatch => "ShapeMismatch",
            ErrorKind::DTypeMismatch => "DTypeMismatch",
            ErrorKind::DateParse => "DateParseError",
            ErrorKind::Range => "RangeError",
            ErrorKind::IndexOutOfRange => "IndexOutOfRange",
            ErrorKind::EmptyAggregate => "EmptyAggregate",
        };
        f.write_str(name)
    }
}

/// A value-level failure raised by an op kernel.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind}: {message}")]
pub struct OpError {
    pub kind: ErrorKind,
    pub message: String,
}

impl OpError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        OpError {
            kind,
            message: message.into(),
        }
    }
}

/// Why a stage definition was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValidationKind {
    UnknownOp,
    InvalidParams,
    Arity,
    UnknownColumn,
    DTypeMismatch,
    ShapeMismatch,
    InvalidPattern,
    MissingState,
}

/// A stage that cannot be built, attributed to the stage name.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("stage `{stage}`: {message}")]
pub struct ValidationError {
    pub stage: String,
    pub kind: ValidationKind,
    pub message: String,
}

impl ValidationError {
    pub fn new(stage: impl Into<String>, kind: ValidationKind, message: impl Into<String>) -> Self {
        ValidationError {
            stage: stage.into(),
            kind,
            message: message.into(),
        }
    }
}

/// Errors from schema and batch construction.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemaError {
    #[error("invalid field name `{0}`: names must be non-empty and must not contain '/'")]
    InvalidName(String),
    #[error("duplicate field `{0}`")]
    DuplicateField(String),
    #[error("shape rank {0} exceeds the maximum nesting depth of 2")]
    RankTooHigh(usize),
    #[error("list dimensions must be at least 1")]
    ZeroDim,
    #[error("field `{field}` has a variable dimension; only fixed shapes are allowed here")]
    VariableDim { field: String },
    #[error("column `{field}`: {message}")]
    Conform { field: String, message: String },
    #[error("column count {got} does not match schema field count {expected}")]
    ColumnCount { expected: usize, got: usize },
    #[error("column `{field}` has {got} rows, expected {expected}")]
    RowCount {
        field: String,
        expected: usize,
        got: usize,
    },
    #[error("batches have different schemas")]
    SchemaMismatch,
}
