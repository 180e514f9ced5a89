//! Shared foundation for featherpipe: the value model, schemas, columnar
//! batches, scalar kernels, the op catalog and the bundle document format.
//!
//! Everything here is used by both the batch engine and the row runtime, so
//! the two backends agree on types, hashing, rendering and arithmetic by
//! construction and differ only in how they traverse data.

pub mod batch;
pub mod doc;
pub mod error;
pub mod hash;
pub mod json;
pub mod kernels;
pub mod manifest;
pub mod num;
pub mod ops;
pub mod schema;
pub mod state;
pub mod value;

pub use batch::{Array, Column, ListArray, RecordBatch};
pub use error::{ErrorKind, OpError, SchemaError, ValidationError, ValidationKind};
pub use hash::{bloom_indices, hash_index, murmur3_32, HASH_SEED};
pub use manifest::{BundleManifest, BundleOp, ManifestError, FORMAT_VERSION};
pub use num::Real;
pub use ops::{infer_chain, Op, OpKind, Signature, StageDef};
pub use schema::{DType, Dim, FieldSpec, Schema, ShapeSpec};
pub use state::FittedState;
pub use value::{canonical_render, coerce, Value};

/// Scaling statistics at the precision of `float64` cells.
pub type ScaleStatsF64 = kernels::numeric::ScaleStats<f64>;
