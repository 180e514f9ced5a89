//! Standalone inference runtime for exported featherpipe bundles.
//!
//! Loads a `bundle.json` document into an [`ExecutablePlan`] and executes it
//! one row at a time. The crate depends only on `featherpipe-core`; nothing
//! from the fitting engine is linked in.

mod eval;
mod plan;
mod row;

pub use featherpipe_core::manifest::{BundleManifest, ManifestError, FORMAT_VERSION};
pub use plan::ExecutablePlan;
pub use row::{ExecError, Row, RowError, RowMode, RowValidationError};
