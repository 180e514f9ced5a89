use std::collections::BTreeMap;

use featherpipe_core::error::OpError;
use featherpipe_core::json::{row_to_json, value_from_json};
use featherpipe_core::kernels::date::DatePart;
use featherpipe_core::kernels::logic::{CompareKind, LogicalKind};
use featherpipe_core::kernels::numeric::{AggKind, ArithKind, ScaleStats};
use featherpipe_core::kernels::text::{CaseKind, RegexExtractor};
use featherpipe_core::kernels::vocab::VocabIndex;
use featherpipe_core::manifest::{BundleManifest, ManifestError};
use featherpipe_core::schema::{DType, Schema, ShapeSpec};
use featherpipe_core::value::coerce;
use featherpipe_core::{FittedState, Op, Value};
use serde_json::Value as Json;

use crate::eval::eval;
use crate::row::{ExecError, Row, RowError, RowMode, RowValidationError};

/// Compiled form of one op.
#[derive(Debug, Clone)]
pub(crate) enum Kernel {
    Identity,
    Hash { bins: u32, mask: Option<String> },
    Bloom { bins: u32, hashes: u32 },
    Log { alpha: f64 },
    Arith { kind: ArithKind, constant: Option<f64> },
    Split { separator: String, len: usize, default: String },
    Regex(RegexExtractor),
    Case(CaseKind),
    Concat { separator: String, constants: Vec<String> },
    DatePart(DatePart),
    DateDiff,
    Haversine,
    Logical(LogicalKind),
    Compare { kind: CompareKind, constant: Option<Value> },
    Select { if_true: Option<Value>, if_false: Option<Value> },
    Assemble,
    Disassemble { parts: usize },
    Slice { start: usize, len: usize },
    Aggregate { kind: AggKind, mask: Option<f64>, dtype: DType },
    Index(VocabIndex),
    OneHot { vocab: VocabIndex, drop_unseen: bool },
    Scale(ScaleStats<f64>),
    Impute { value: f64, sentinel: Option<f64> },
}

#[derive(Debug, Clone)]
struct Step {
    name: String,
    kernel: Kernel,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    /// Per input: explicit conversion, then the operand conversion.
    conversions: Vec<(Option<DType>, Option<DType>)>,
    input_shape: ShapeSpec,
}

/// A loaded bundle, ready for repeated row execution. Immutable and safe to
/// share across threads.
#[derive(Debug, Clone)]
pub struct ExecutablePlan {
    inputs: Schema,
    schema: Schema,
    steps: Vec<Step>,
}

fn invalid_state(op: &str, message: impl Into<String>) -> ManifestError {
    ManifestError::InvalidState {
        op: op.to_string(),
        message: message.into(),
    }
}

fn vocab(op: &str, state: Option<&FittedState>, num_oov: u32, mask: Option<&str>) -> Result<VocabIndex, ManifestError> {
    match state {
        Some(FittedState::Vocabulary { labels }) => {
            VocabIndex::new(labels, num_oov, mask).map_err(|e| invalid_state(op, e.to_string()))
        }
        _ => Err(ManifestError::MissingAsset { op: op.to_string() }),
    }
}

impl ExecutablePlan {
    /// Parses and validates a bundle document.
    pub fn load_str(text: &str) -> Result<Self, ManifestError> {
        Self::load(&BundleManifest::from_json_str(text)?)
    }

    pub fn load(manifest: &BundleManifest) -> Result<Self, ManifestError> {
        let (schema, sigs) = manifest.signatures()?;
        let mut steps = Vec::with_capacity(sigs.len());
        for (op, sig) in manifest.ops.iter().zip(sigs) {
            let stage = &op.stage;
            let name = stage.name.as_str();
            let state = op.state.as_ref();
            let kernel = match &stage.op {
                Op::HashIndex(p) => Kernel::Hash { bins: p.num_bins, mask: p.mask_token.clone() },
                Op::BloomEncode(p) => Kernel::Bloom { bins: p.num_bins, hashes: p.num_hashes },
                Op::LogTransform(p) => Kernel::Log { alpha: p.alpha },
                Op::Arithmetic(p) => Kernel::Arith { kind: p.kind, constant: p.constant },
                Op::StringToList(p) => Kernel::Split {
                    separator: p.separator.clone(),
                    len: p.list_length,
                    default: p.default_value.clone(),
                },
                Op::RegexExtract(p) => Kernel::Regex(
                    RegexExtractor::new(&p.pattern, p.group_index, &p.default_value)
                        .map_err(|e| invalid_state(name, e.to_string()))?,
                ),
                Op::StringCase(p) => Kernel::Case(p.kind),
                Op::StringConcat(p) => Kernel::Concat {
                    separator: p.separator.clone(),
                    constants: p.constants.clone(),
                },
                Op::DateDecompose(p) => Kernel::DatePart(p.part),
                Op::DateDiffDays => Kernel::DateDiff,
                Op::HaversineKm => Kernel::Haversine,
                Op::Logical(p) => Kernel::Logical(p.kind),
                Op::Compare(p) => Kernel::Compare { kind: p.kind, constant: sig.constant.clone() },
                Op::ConditionalSelect(_) => Kernel::Select {
                    if_true: sig.if_true.clone(),
                    if_false: sig.if_false.clone(),
                },
                Op::ArrayAssemble => Kernel::Assemble,
                Op::ArrayDisassemble => Kernel::Disassemble { parts: sig.outputs.len() },
                Op::ArraySlice(p) => Kernel::Slice { start: p.start, len: p.length },
                Op::ListAggregate(p) => Kernel::Aggregate {
                    kind: p.kind,
                    mask: p.mask_value,
                    dtype: sig.operand_dtypes[0],
                },
                Op::Cast(_) => Kernel::Identity,
                Op::StringIndex(p) | Op::SharedStringIndex(p) => {
                    Kernel::Index(vocab(name, state, p.num_oov_indices, p.mask_token.as_deref())?)
                }
                Op::OneHotEncode(p) => Kernel::OneHot {
                    vocab: vocab(name, state, p.num_oov_indices, p.mask_token.as_deref())?,
                    drop_unseen: p.drop_unseen,
                },
                Op::StandardScale => match state {
                    Some(FittedState::Moments { mean, std }) => Kernel::Scale(ScaleStats {
                        mean: mean.clone(),
                        std: std.clone(),
                    }),
                    _ => return Err(ManifestError::MissingAsset { op: name.to_string() }),
                },
                Op::Impute(p) => match state {
                    Some(FittedState::Impute { value }) => Kernel::Impute { value: *value, sentinel: p.sentinel },
                    _ => return Err(ManifestError::MissingAsset { op: name.to_string() }),
                },
            };
            let conversions = sig
                .sources
                .iter()
                .zip(&sig.operand_dtypes)
                .map(|(src, &operand)| {
                    let explicit = stage.input_dtype.filter(|d| *d != src.dtype);
                    let after = explicit.unwrap_or(src.dtype);
                    (explicit, (operand != after).then_some(operand))
                })
                .collect();
            let index = |n: &String| schema.index_of(n).expect("inferred schema holds every column");
            steps.push(Step {
                name: stage.name.clone(),
                kernel,
                inputs: stage.inputs.iter().map(index).collect(),
                outputs: stage.outputs.iter().map(index).collect(),
                conversions,
                input_shape: sig.sources.first().map(|f| f.shape.clone()).unwrap_or_default(),
            });
        }
        Ok(ExecutablePlan {
            inputs: manifest.inputs.clone(),
            schema,
            steps,
        })
    }

    pub fn input_schema(&self) -> &Schema {
        &self.inputs
    }

    /// Inputs followed by every op output, in execution order.
    pub fn output_schema(&self) -> &Schema {
        &self.schema
    }

    pub fn num_ops(&self) -> usize {
        self.steps.len()
    }

    /// Executes on input values given positionally in input-schema order.
    /// Returns values for the full output schema.
    pub fn execute_values(&self, mut values: Vec<Value>) -> Result<Vec<Value>, ExecError> {
        debug_assert_eq!(values.len(), self.inputs.len());
        values.resize(self.schema.len(), Value::Null);
        let mut converted: Vec<Value> = Vec::new();
        for step in &self.steps {
            let fail = |column: usize, e: OpError| ExecError {
                stage: step.name.clone(),
                column: self.schema.fields()[column].name.clone(),
                kind: e.kind,
                message: e.message,
            };
            converted.clear();
            for (&slot, (explicit, operand)) in step.inputs.iter().zip(&step.conversions) {
                let mut v = values[slot].clone();
                for target in [explicit, operand].into_iter().flatten() {
                    v = coerce(&v, *target).map_err(|e| fail(slot, e))?;
                }
                converted.push(v);
            }
            let args: Vec<&Value> = converted.iter().collect();
            let outputs = eval(&step.kernel, &args, &step.input_shape)
                .map_err(|e| fail(step.inputs.first().copied().unwrap_or(0), e))?;
            for (slot, v) in step.outputs.iter().zip(outputs) {
                values[*slot] = v;
            }
        }
        Ok(values)
    }

    /// Checks a row against the input schema and orders its values.
    pub fn validate_row(&self, row: &Row, mode: RowMode) -> Result<Vec<Value>, RowValidationError> {
        if mode == RowMode::Strict {
            if let Some(extra) = row.keys().find(|k| !self.inputs.contains(k)) {
                return Err(RowValidationError::new(format!("unexpected field `{extra}`")));
            }
        }
        self.inputs
            .fields()
            .iter()
            .map(|f| {
                let v = row
                    .get(&f.name)
                    .ok_or_else(|| RowValidationError::new(format!("missing field `{}`", f.name)))?;
                v.conforms_to(f)
                    .map_err(|m| RowValidationError::new(format!("field `{}`: {m}", f.name)))?;
                Ok(v.clone())
            })
            .collect()
    }

    /// Decodes and validates a JSON object row.
    pub fn row_from_json(&self, json: &Json, mode: RowMode) -> Result<Vec<Value>, RowValidationError> {
        let map = json
            .as_object()
            .ok_or_else(|| RowValidationError::new("row must be a JSON object"))?;
        if mode == RowMode::Strict {
            if let Some(extra) = map.keys().find(|k| !self.inputs.contains(k)) {
                return Err(RowValidationError::new(format!("unexpected field `{extra}`")));
            }
        }
        self.inputs
            .fields()
            .iter()
            .map(|f| {
                let v = map
                    .get(&f.name)
                    .ok_or_else(|| RowValidationError::new(format!("missing field `{}`", f.name)))?;
                value_from_json(v, f).map_err(|m| RowValidationError::new(format!("field `{}`: {m}", f.name)))
            })
            .collect()
    }

    /// Executes one row, returning its inputs plus all outputs.
    pub fn execute(&self, row: &Row, mode: RowMode) -> Result<Row, RowError> {
        let values = self.validate_row(row, mode)?;
        let out = self.execute_values(values)?;
        Ok(self.schema.names().map(str::to_string).zip(out).collect::<BTreeMap<_, _>>())
    }

    /// Element-wise [`execute`](Self::execute); order preserved, failures
    /// reported per row.
    pub fn execute_batch(&self, rows: &[Row], mode: RowMode) -> Vec<Result<Row, RowError>> {
        rows.iter().map(|r| self.execute(r, mode)).collect()
    }

    /// JSON in, JSON out; used by the serving endpoint and `infer`.
    pub fn execute_json(&self, row: &Json, mode: RowMode) -> Result<Json, RowError> {
        let values = self.row_from_json(row, mode)?;
        let out = self.execute_values(values)?;
        Ok(row_to_json(&self.schema, &out))
    }
}
