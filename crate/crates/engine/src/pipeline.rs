//! Staged fitting and partition-parallel batch execution.

use featherpipe_core::batch::{Column, RecordBatch};
use featherpipe_core::kernels::numeric::is_missing;
use featherpipe_core::manifest::{BundleManifest, BundleOp};
use featherpipe_core::ops::{ImputeStrategy, Op, Signature, StageDef};
use featherpipe_core::schema::Schema;
use featherpipe_core::{FittedState, ManifestError, SchemaError};
use rayon::prelude::*;

use crate::columnar::{evaluate, operand_columns, Failure, Prepared};
use crate::error::EngineError;
use crate::estimators::{ExactMoments, FrequencyPartial, ImputePartial, MomentsPartial};
use crate::spec::PipelineSpec;

/// A stage with its resolved state and types.
#[derive(Debug, Clone)]
pub struct FittedStage {
    pub stage: StageDef,
    pub state: Option<FittedState>,
    signature: Signature,
    prepared: Prepared,
}

impl FittedStage {
    fn new(stage: StageDef, state: Option<FittedState>, signature: Signature) -> Result<Self, EngineError> {
        let prepared = Prepared::new(&stage, state.as_ref()).map_err(|message| {
            ManifestError::InvalidState {
                op: stage.name.clone(),
                message,
            }
        })?;
        Ok(FittedStage {
            stage,
            state,
            signature,
            prepared,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    fn run(&self, batch: &RecordBatch, partition: usize) -> Result<Vec<Column>, EngineError> {
        let sources = sources(&self.stage, batch);
        evaluate(&self.stage, &self.signature, &self.prepared, &sources, batch.num_rows())
            .map_err(|f| transform_error(&self.stage, f, partition))
    }

    fn apply(&self, batch: &mut RecordBatch, partition: usize) -> Result<(), EngineError> {
        let columns = self.run(batch, partition)?;
        for (field, col) in self.signature.outputs.iter().zip(columns) {
            batch.push_column(field.clone(), col)?;
        }
        Ok(())
    }
}

fn sources<'a>(stage: &StageDef, batch: &'a RecordBatch) -> Vec<&'a Column> {
    stage
        .inputs
        .iter()
        .map(|c| batch.column(c).expect("validated stage inputs exist"))
        .collect()
}

fn transform_error(stage: &StageDef, f: Failure, partition: usize) -> EngineError {
    EngineError::Transform {
        stage: stage.name.clone(),
        column: stage.inputs.get(f.input).cloned().unwrap_or_default(),
        partition,
        row: f.row,
        kind: f.error.kind,
        message: f.error.message,
    }
}

/// Everything an estimator accumulates over one partition.
enum Partial {
    Frequency(FrequencyPartial),
    Moments(MomentsPartial<f64>),
    Impute(ImputePartial),
}

impl Partial {
    fn merge(self, other: Partial) -> Partial {
        match (self, other) {
            (Partial::Frequency(a), Partial::Frequency(b)) => Partial::Frequency(a.merge(b)),
            (Partial::Moments(a), Partial::Moments(b)) => Partial::Moments(a.merge(&b)),
            (Partial::Impute(a), Partial::Impute(b)) => Partial::Impute(a.merge(b)),
            _ => unreachable!("partials of one stage share a type"),
        }
    }
}

fn valid_leaves(col: &Column) -> impl Iterator<Item = usize> + '_ {
    let leaf = col.leaf();
    (0..leaf.len()).filter(move |&k| leaf.is_valid(k))
}

fn accumulate(stage: &StageDef, sig: &Signature, batch: &RecordBatch, partition: usize) -> Result<Partial, EngineError> {
    let cols = operand_columns(stage, sig, &sources(stage, batch)).map_err(|f| transform_error(stage, f, partition))?;
    let floats = |c: &Column| match c.leaf() {
        Column::Float64(a) => a.values().to_vec(),
        other => unreachable!("numeric estimators see float64 operands, got {}", other.dtype()),
    };
    Ok(match &stage.op {
        Op::StringIndex(_) | Op::SharedStringIndex(_) | Op::OneHotEncode(_) => {
            let p = stage.op.vocab_params().expect("vocabulary stage");
            let mut f = FrequencyPartial::new();
            for c in &cols {
                let Column::Utf8(a) = c.leaf() else {
                    unreachable!("vocabulary estimators see string operands")
                };
                for k in valid_leaves(c) {
                    let s = &a.values()[k];
                    if p.mask_token.as_deref() != Some(s.as_str()) {
                        f.observe(s);
                    }
                }
            }
            Partial::Frequency(f)
        }
        Op::StandardScale => {
            let c = &cols[0];
            let positions = c.leaves_per_row().max(1);
            let xs = floats(c);
            let mut m = MomentsPartial::new(positions);
            for k in valid_leaves(c) {
                m.observe(k % positions, xs[k]);
            }
            Partial::Moments(m)
        }
        Op::Impute(p) => {
            let c = &cols[0];
            let xs = floats(c);
            let mut acc = match p.strategy {
                ImputeStrategy::Mean => ImputePartial::Mean(ExactMoments::default()),
                ImputeStrategy::Median => ImputePartial::Median(Vec::new()),
            };
            for k in valid_leaves(c) {
                if !is_missing(xs[k], p.sentinel) {
                    acc.observe(xs[k]);
                }
            }
            Partial::Impute(acc)
        }
        _ => unreachable!("only estimators accumulate"),
    })
}

fn finalize(stage: &StageDef, partial: Partial) -> Result<FittedState, EngineError> {
    match partial {
        Partial::Frequency(f) => {
            if f.is_empty() {
                return Err(EngineError::EmptyVocabulary {
                    stage: stage.name.clone(),
                });
            }
            let order = stage.op.vocab_params().expect("vocabulary stage").string_order_type;
            Ok(FittedState::Vocabulary { labels: f.labels(order) })
        }
        Partial::Moments(m) => {
            if let Some(&pos) = m.empty_positions().first() {
                return Err(EngineError::AllMissing {
                    stage: stage.name.clone(),
                    message: format!("position {pos} has no non-null values"),
                });
            }
            Ok(FittedState::Moments { mean: m.mean(), std: m.std() })
        }
        Partial::Impute(p) => p
            .finalize()
            .map(|value| FittedState::Impute { value })
            .ok_or_else(|| EngineError::AllMissing {
                stage: stage.name.clone(),
                message: "every value is null or the sentinel".into(),
            }),
    }
}

fn check_inputs(inputs: &Schema, batch: &RecordBatch) -> Result<RecordBatch, EngineError> {
    if batch.schema() == inputs {
        return Ok(batch.clone());
    }
    for f in inputs.fields() {
        match batch.schema().field(&f.name) {
            Some(g) if g == f => {}
            Some(g) => {
                return Err(SchemaError::Conform {
                    field: f.name.clone(),
                    message: format!("expected {f}, got {g}"),
                }
                .into())
            }
            None => {
                return Err(SchemaError::Conform {
                    field: f.name.clone(),
                    message: "missing input column".into(),
                }
                .into())
            }
        }
    }
    let names: Vec<&str> = inputs.names().collect();
    Ok(batch.select(&names)?)
}

/// Fits every estimator stage over `partitions`.
///
/// Stages run in dependency order. Each estimator accumulates one partial
/// per partition in parallel, merges them in partition order and finalizes;
/// its transform is then applied to every partition before any downstream
/// estimator runs.
pub fn fit(spec: &PipelineSpec, partitions: &[RecordBatch]) -> Result<FittedPipeline, EngineError> {
    let mut parts = partitions
        .iter()
        .map(|b| check_inputs(&spec.inputs, b))
        .collect::<Result<Vec<_>, _>>()?;
    let order = spec.topo_order()?;
    let last_estimator = order.iter().rposition(|&i| spec.stages[i].op.kind().is_estimator());
    let mut schema = spec.inputs.clone();
    let mut stages = Vec::with_capacity(order.len());
    for (pos, &i) in order.iter().enumerate() {
        let stage = &spec.stages[i];
        let state = if stage.op.kind().is_estimator() {
            let sig = stage.infer(&schema, None)?;
            let partials = parts
                .par_iter()
                .enumerate()
                .map(|(p, batch)| accumulate(stage, &sig, batch, p))
                .collect::<Result<Vec<_>, _>>()?;
            let merged = partials.into_iter().reduce(Partial::merge);
            let merged = match merged {
                Some(m) => m,
                None => accumulate(stage, &sig, &RecordBatch::empty(schema.clone())?, 0)?,
            };
            Some(finalize(stage, merged)?)
        } else {
            None
        };
        let sig = stage.infer(&schema, state.as_ref())?;
        for f in &sig.outputs {
            schema.push(f.clone())?;
        }
        let fitted = FittedStage::new(stage.clone(), state, sig)?;
        if last_estimator.is_some_and(|last| pos < last) {
            parts
                .par_iter_mut()
                .enumerate()
                .try_for_each(|(p, batch)| fitted.apply(batch, p))?;
        }
        stages.push(fitted);
    }
    Ok(FittedPipeline {
        inputs: spec.inputs.clone(),
        schema,
        stages,
    })
}

/// A frozen pipeline: stages in execution order with their fitted state.
#[derive(Debug, Clone)]
pub struct FittedPipeline {
    inputs: Schema,
    schema: Schema,
    stages: Vec<FittedStage>,
}

impl FittedPipeline {
    pub fn input_schema(&self) -> &Schema {
        &self.inputs
    }

    /// Inputs followed by every stage output, in execution order.
    pub fn output_schema(&self) -> &Schema {
        &self.schema
    }

    pub fn stages(&self) -> &[FittedStage] {
        &self.stages
    }

    pub fn state(&self, stage: &str) -> Option<&FittedState> {
        self.stages.iter().find(|s| s.stage.name == stage)?.state.as_ref()
    }

    /// Runs every stage on `batch`, keeping inputs and all intermediates.
    pub fn transform(&self, batch: &RecordBatch) -> Result<RecordBatch, EngineError> {
        self.transform_partition(batch, 0)
    }

    fn transform_partition(&self, batch: &RecordBatch, partition: usize) -> Result<RecordBatch, EngineError> {
        let mut out = check_inputs(&self.inputs, batch)?;
        for s in &self.stages {
            s.apply(&mut out, partition)?;
        }
        Ok(out)
    }

    /// Transforms partitions in parallel; output order matches input order.
    pub fn transform_partitions(&self, partitions: &[RecordBatch]) -> Result<Vec<RecordBatch>, EngineError> {
        partitions
            .par_iter()
            .enumerate()
            .map(|(p, b)| self.transform_partition(b, p))
            .collect()
    }

    /// The portable bundle for this pipeline.
    pub fn export(&self) -> BundleManifest {
        BundleManifest {
            inputs: self.inputs.clone(),
            ops: self
                .stages
                .iter()
                .map(|s| BundleOp {
                    stage: s.stage.clone(),
                    state: s.state.clone(),
                })
                .collect(),
        }
    }

    /// Rebuilds a pipeline from a bundle, for batch execution of a bundle.
    pub fn from_manifest(manifest: &BundleManifest) -> Result<Self, EngineError> {
        let spec = PipelineSpec::new(
            manifest.inputs.clone(),
            manifest.ops.iter().map(|op| op.stage.clone()).collect(),
        )?;
        let (schema, sigs) = manifest.signatures()?;
        if spec.topo_order()? != (0..manifest.ops.len()).collect::<Vec<_>>() {
            return Err(EngineError::Manifest(ManifestError::Parse(
                "ops are not in dependency order".into(),
            )));
        }
        let stages = manifest
            .ops
            .iter()
            .zip(sigs)
            .map(|(op, sig)| {
                if op.stage.op.kind().is_estimator() && op.state.is_none() {
                    return Err(ManifestError::MissingAsset {
                        op: op.stage.name.clone(),
                    }
                    .into());
                }
                FittedStage::new(op.stage.clone(), op.state.clone(), sig)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FittedPipeline {
            inputs: manifest.inputs.clone(),
            schema,
            stages,
        })
    }
}
