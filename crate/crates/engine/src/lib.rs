//! Columnar batch engine: pipeline specs, staged fitting with mergeable
//! estimator partials, and partition-parallel transforms.

mod columnar;
pub mod error;
pub mod estimators;
pub mod pipeline;
pub mod spec;

pub use error::EngineError;
pub use estimators::{ExactMoments, FrequencyPartial, ImputePartial, MomentsPartial};
pub use pipeline::{fit, FittedPipeline, FittedStage};
pub use spec::PipelineSpec;

/// Moments at the precision of `float64` cells.
pub type MomentsPartialF64 = MomentsPartial<f64>;
