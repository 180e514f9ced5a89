//! The op catalog: kinds, typed parameters, stage definitions and static
//! schema inference.
//!
//! Both backends execute a stage against its [`Signature`], which records the
//! dtype each input is converted to before the kernel runs and the exact
//! output fields. Inference is the single source of truth for those.

use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Map;

use crate::error::{ValidationError, ValidationKind};
use crate::kernels::date::DatePart;
use crate::kernels::logic::{CompareKind, LogicalKind};
use crate::kernels::numeric::{AggKind, ArithKind};
use crate::kernels::text::{CaseKind, RegexExtractor};
use crate::kernels::vocab::VocabIndex;
use crate::schema::{validate_name, DType, Dim, FieldSpec, Schema, ShapeSpec};
use crate::state::FittedState;
use crate::value::{coercible, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    HashIndex,
    BloomEncode,
    LogTransform,
    Arithmetic,
    StringToList,
    RegexExtract,
    StringCase,
    StringConcat,
    DateDecompose,
    DateDiffDays,
    HaversineKm,
    Logical,
    Compare,
    ConditionalSelect,
    ArrayAssemble,
    ArrayDisassemble,
    ArraySlice,
    ListAggregate,
    Cast,
    StringIndex,
    SharedStringIndex,
    OneHotEncode,
    StandardScale,
    Impute,
}

impl OpKind {
    pub const ALL: [OpKind; 24] = [
        OpKind::HashIndex,
        OpKind::BloomEncode,
        OpKind::LogTransform,
        OpKind::Arithmetic,
        OpKind::StringToList,
        OpKind::RegexExtract,
        OpKind::StringCase,
        OpKind::StringConcat,
        OpKind::DateDecompose,
        OpKind::DateDiffDays,
        OpKind::HaversineKm,
        OpKind::Logical,
        OpKind::Compare,
        OpKind::ConditionalSelect,
        OpKind::ArrayAssemble,
        OpKind::ArrayDisassemble,
        OpKind::ArraySlice,
        OpKind::ListAggregate,
        OpKind::Cast,
        OpKind::StringIndex,
        OpKind::SharedStringIndex,
        OpKind::OneHotEncode,
        OpKind::StandardScale,
        OpKind::Impute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::HashIndex => "hash_index",
            OpKind::BloomEncode => "bloom_encode",
            OpKind::LogTransform => "log_transform",
            OpKind::Arithmetic => "arithmetic",
            OpKind::StringToList => "string_to_list",
            OpKind::RegexExtract => "regex_extract",
            OpKind::StringCase => "string_case",
            OpKind::StringConcat => "string_concat",
            OpKind::DateDecompose => "date_decompose",
            OpKind::DateDiffDays => "date_diff_days",
            OpKind::HaversineKm => "haversine_km",
            OpKind::Logical => "logical",
            OpKind::Compare => "compare",
            OpKind::ConditionalSelect => "conditional_select",
            OpKind::ArrayAssemble => "array_assemble",
            OpKind::ArrayDisassemble => "array_disassemble",
            OpKind::ArraySlice => "array_slice",
            OpKind::ListAggregate => "list_aggregate",
            OpKind::Cast => "cast",
            OpKind::StringIndex => "string_index",
            OpKind::SharedStringIndex => "shared_string_index",
            OpKind::OneHotEncode => "one_hot_encode",
            OpKind::StandardScale => "standard_scale",
            OpKind::Impute => "impute",
        }
    }

    /// Estimators learn state during fit.
    pub fn is_estimator(self) -> bool {
        matches!(
            self,
            OpKind::StringIndex
                | OpKind::SharedStringIndex
                | OpKind::OneHotEncode
                | OpKind::StandardScale
                | OpKind::Impute
        )
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OpKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown op kind `{s}`"))
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn default_oov() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct HashIndexParams {
    pub num_bins: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_token: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BloomEncodeParams {
    pub num_bins: u32,
    pub num_hashes: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LogTransformParams {
    #[serde(default)]
    pub alpha: f64,
}

/// With one input column the constant is the right operand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ArithmeticParams {
    pub kind: ArithKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StringToListParams {
    pub separator: String,
    pub list_length: usize,
    #[serde(default)]
    pub default_value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RegexExtractParams {
    pub pattern: String,
    #[serde(default)]
    pub group_index: usize,
    #[serde(default)]
    pub default_value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StringCaseParams {
    pub kind: CaseKind,
}

/// Joins the input columns, then `constants`, with `separator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StringConcatParams {
    #[serde(default)]
    pub separator: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DateDecomposeParams {
    pub part: DatePart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LogicalParams {
    pub kind: LogicalKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CompareParams {
    pub kind: CompareKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<serde_json::Value>,
}

/// Branch constants replace the corresponding input column; inputs are
/// `[cond, ifTrue?, ifFalse?]` in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConditionalSelectParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub if_true: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub if_false: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ArraySliceParams {
    pub start: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ListAggregateParams {
    pub kind: AggKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CastParams {
    pub dtype: DType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum OrderType {
    #[default]
    FrequencyDesc,
    FrequencyAsc,
    AlphabeticalAsc,
    AlphabeticalDesc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct VocabParams {
    #[serde(default)]
    pub string_order_type: OrderType,
    #[serde(rename = "numOOVIndices", default = "default_oov")]
    pub num_oov_indices: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_token: Option<String>,
}

impl Default for VocabParams {
    fn default() -> Self {
        VocabParams {
            string_order_type: OrderType::default(),
            num_oov_indices: 1,
            mask_token: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OneHotParams {
    #[serde(default)]
    pub string_order_type: OrderType,
    #[serde(rename = "numOOVIndices", default = "default_oov")]
    pub num_oov_indices: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_token: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub drop_unseen: bool,
}

impl OneHotParams {
    pub fn vocab(&self) -> VocabParams {
        VocabParams {
            string_order_type: self.string_order_type,
            num_oov_indices: self.num_oov_indices,
            mask_token: self.mask_token.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ImputeStrategy {
    Mean,
    Median,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ImputeParams {
    pub strategy: ImputeStrategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentinel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

/// An op with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    HashIndex(HashIndexParams),
    BloomEncode(BloomEncodeParams),
    LogTransform(LogTransformParams),
    Arithmetic(ArithmeticParams),
    StringToList(StringToListParams),
    RegexExtract(RegexExtractParams),
    StringCase(StringCaseParams),
    StringConcat(StringConcatParams),
    DateDecompose(DateDecomposeParams),
    DateDiffDays,
    HaversineKm,
    Logical(LogicalParams),
    Compare(CompareParams),
    ConditionalSelect(ConditionalSelectParams),
    ArrayAssemble,
    ArrayDisassemble,
    ArraySlice(ArraySliceParams),
    ListAggregate(ListAggregateParams),
    Cast(CastParams),
    StringIndex(VocabParams),
    SharedStringIndex(VocabParams),
    OneHotEncode(OneHotParams),
    StandardScale,
    Impute(ImputeParams),
}

fn de<T: DeserializeOwned>(params: &Map<String, serde_json::Value>) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::Object(params.clone())).map_err(|e| e.to_string())
}

fn ser<T: Serialize>(params: &T) -> Map<String, serde_json::Value> {
    match serde_json::to_value(params).expect("params serialize") {
        serde_json::Value::Object(map) => map,
        _ => unreachable!("params are structs"),
    }
}

impl Op {
    pub fn kind(&self) -> OpKind {
        match self {
            Op::HashIndex(_) => OpKind::HashIndex,
            Op::BloomEncode(_) => OpKind::BloomEncode,
            Op::LogTransform(_) => OpKind::LogTransform,
            Op::Arithmetic(_) => OpKind::Arithmetic,
            Op::StringToList(_) => OpKind::StringToList,
            Op::RegexExtract(_) => OpKind::RegexExtract,
            Op::StringCase(_) => OpKind::StringCase,
            Op::StringConcat(_) => OpKind::StringConcat,
            Op::DateDecompose(_) => OpKind::DateDecompose,
            Op::DateDiffDays => OpKind::DateDiffDays,
            Op::HaversineKm => OpKind::HaversineKm,
            Op::Logical(_) => OpKind::Logical,
            Op::Compare(_) => OpKind::Compare,
            Op::ConditionalSelect(_) => OpKind::ConditionalSelect,
            Op::ArrayAssemble => OpKind::ArrayAssemble,
            Op::ArrayDisassemble => OpKind::ArrayDisassemble,
            Op::ArraySlice(_) => OpKind::ArraySlice,
            Op::ListAggregate(_) => OpKind::ListAggregate,
            Op::Cast(_) => OpKind::Cast,
            Op::StringIndex(_) => OpKind::StringIndex,
            Op::SharedStringIndex(_) => OpKind::SharedStringIndex,
            Op::OneHotEncode(_) => OpKind::OneHotEncode,
            Op::StandardScale => OpKind::StandardScale,
            Op::Impute(_) => OpKind::Impute,
        }
    }

    /// Parses and checks parameters for `kind`.
    pub fn from_params(kind: OpKind, params: &Map<String, serde_json::Value>) -> Result<Op, (ValidationKind, String)> {
        let invalid = |m: String| (ValidationKind::InvalidParams, m);
        let op = match kind {
            OpKind::HashIndex => Op::HashIndex(de(params).map_err(invalid)?),
            OpKind::BloomEncode => Op::BloomEncode(de(params).map_err(invalid)?),
            OpKind::LogTransform => Op::LogTransform(de(params).map_err(invalid)?),
            OpKind::Arithmetic => Op::Arithmetic(de(params).map_err(invalid)?),
            OpKind::StringToList => Op::StringToList(de(params).map_err(invalid)?),
            OpKind::RegexExtract => Op::RegexExtract(de(params).map_err(invalid)?),
            OpKind::StringCase => Op::StringCase(de(params).map_err(invalid)?),
            OpKind::StringConcat => Op::StringConcat(de(params).map_err(invalid)?),
            OpKind::DateDecompose => Op::DateDecompose(de(params).map_err(invalid)?),
            OpKind::Logical => Op::Logical(de(params).map_err(invalid)?),
            OpKind::Compare => Op::Compare(de(params).map_err(invalid)?),
            OpKind::ConditionalSelect => Op::ConditionalSelect(de(params).map_err(invalid)?),
            OpKind::ArraySlice => Op::ArraySlice(de(params).map_err(invalid)?),
            OpKind::ListAggregate => Op::ListAggregate(de(params).map_err(invalid)?),
            OpKind::Cast => Op::Cast(de(params).map_err(invalid)?),
            OpKind::StringIndex => Op::StringIndex(de(params).map_err(invalid)?),
            OpKind::SharedStringIndex => Op::SharedStringIndex(de(params).map_err(invalid)?),
            OpKind::OneHotEncode => Op::OneHotEncode(de(params).map_err(invalid)?),
            OpKind::Impute => Op::Impute(de(params).map_err(invalid)?),
            OpKind::DateDiffDays
            | OpKind::HaversineKm
            | OpKind::ArrayAssemble
            | OpKind::ArrayDisassemble
            | OpKind::StandardScale => {
                de::<NoParams>(params).map_err(invalid)?;
                match kind {
                    OpKind::DateDiffDays => Op::DateDiffDays,
                    OpKind::HaversineKm => Op::HaversineKm,
                    OpKind::ArrayAssemble => Op::ArrayAssemble,
                    OpKind::ArrayDisassemble => Op::ArrayDisassemble,
                    _ => Op::StandardScale,
                }
            }
        };
        op.check_params()?;
        Ok(op)
    }

    fn check_params(&self) -> Result<(), (ValidationKind, String)> {
        let fail = |m: &str| Err((ValidationKind::InvalidParams, m.to_string()));
        match self {
            Op::HashIndex(p) if p.num_bins == 0 => fail("numBins must be at least 1"),
            Op::BloomEncode(p) if p.num_bins == 0 => fail("numBins must be at least 1"),
            Op::BloomEncode(p) if p.num_hashes == 0 => fail("numHashes must be at least 1"),
            Op::LogTransform(p) if !p.alpha.is_finite() => fail("alpha must be finite"),
            Op::StringToList(p) if p.separator.is_empty() => fail("separator must be non-empty"),
            Op::StringToList(p) if p.list_length == 0 => fail("listLength must be at least 1"),
            Op::RegexExtract(p) => RegexExtractor::new(&p.pattern, p.group_index, "")
                .map(|_| ())
                .map_err(|e| (ValidationKind::InvalidPattern, e.to_string())),
            Op::ArraySlice(p) if p.length == 0 => fail("length must be at least 1"),
            Op::StringIndex(p) | Op::SharedStringIndex(p) if p.num_oov_indices == 0 => {
                fail("numOOVIndices must be at least 1")
            }
            Op::OneHotEncode(p) if p.num_oov_indices == 0 => fail("numOOVIndices must be at least 1"),
            _ => Ok(()),
        }
    }

    /// Parameters in document form (keys sorted on serialization).
    pub fn params(&self) -> Map<String, serde_json::Value> {
        match self {
            Op::HashIndex(p) => ser(p),
            Op::BloomEncode(p) => ser(p),
            Op::LogTransform(p) => ser(p),
            Op::Arithmetic(p) => ser(p),
            Op::StringToList(p) => ser(p),
            Op::RegexExtract(p) => ser(p),
            Op::StringCase(p) => ser(p),
            Op::StringConcat(p) => ser(p),
            Op::DateDecompose(p) => ser(p),
            Op::Logical(p) => ser(p),
            Op::Compare(p) => ser(p),
            Op::ConditionalSelect(p) => ser(p),
            Op::ArraySlice(p) => ser(p),
            Op::ListAggregate(p) => ser(p),
            Op::Cast(p) => ser(p),
            Op::StringIndex(p) | Op::SharedStringIndex(p) => ser(p),
            Op::OneHotEncode(p) => ser(p),
            Op::Impute(p) => ser(p),
            Op::DateDiffDays
            | Op::HaversineKm
            | Op::ArrayAssemble
            | Op::ArrayDisassemble
            | Op::StandardScale => Map::new(),
        }
    }

    pub fn vocab_params(&self) -> Option<VocabParams> {
        match self {
            Op::StringIndex(p) | Op::SharedStringIndex(p) => Some(p.clone()),
            Op::OneHotEncode(p) => Some(p.vocab()),
            _ => None,
        }
    }
}

/// One stage: an op wired to named input and output columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StageDef {
    pub name: String,
    pub op: Op,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Explicit conversion applied to every input before the op.
    pub input_dtype: Option<DType>,
}

/// Resolved input/output types of a stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    /// Input fields as stored upstream.
    pub sources: Vec<FieldSpec>,
    /// Dtype each input is converted to before the kernel runs (after the
    /// explicit `inputDtype` step).
    pub operand_dtypes: Vec<DType>,
    pub outputs: Vec<FieldSpec>,
    /// Typed right operand for `compare` against a constant.
    pub constant: Option<Value>,
    pub if_true: Option<Value>,
    pub if_false: Option<Value>,
}

impl Signature {
    /// Shape shared by broadcast operands (the first non-scalar input).
    pub fn broadcast_shape(&self) -> ShapeSpec {
        self.sources
            .iter()
            .map(|f| &f.shape)
            .find(|s| !s.is_scalar())
            .cloned()
            .unwrap_or_default()
    }
}

fn dims_compatible(a: &ShapeSpec, b: &ShapeSpec) -> bool {
    a.rank() == b.rank()
        && a.dims()
            .iter()
            .zip(b.dims())
            .all(|(x, y)| matches!((x, y), (Dim::Variable, _) | (_, Dim::Variable)) || x == y)
}

/// Typed constant for a column of `dtype`. Integer literals widen to float.
pub fn typed_constant(json: &serde_json::Value, dtype: DType) -> Option<Value> {
    match (json, dtype) {
        (serde_json::Value::Number(n), DType::Int64) => n.as_i64().map(Value::Int),
        (serde_json::Value::Number(n), DType::Float64) => n.as_f64().map(Value::Float),
        (serde_json::Value::Bool(b), DType::Bool) => Some(Value::Bool(*b)),
        (serde_json::Value::String(s), DType::String) => Some(Value::Str(s.clone())),
        _ => None,
    }
}

fn constant_dtype(json: &serde_json::Value) -> Option<DType> {
    match json {
        serde_json::Value::Number(n) if n.is_i64() => Some(DType::Int64),
        serde_json::Value::Number(_) => Some(DType::Float64),
        serde_json::Value::Bool(_) => Some(DType::Bool),
        serde_json::Value::String(_) => Some(DType::String),
        _ => None,
    }
}

struct Ctx<'a> {
    stage: &'a StageDef,
}

impl Ctx<'_> {
    fn err(&self, kind: ValidationKind, message: impl Into<String>) -> ValidationError {
        ValidationError::new(&self.stage.name, kind, message)
    }

    fn arity(&self, got: usize, ok: bool, expected: &str) -> Result<(), ValidationError> {
        if ok {
            Ok(())
        } else {
            Err(self.err(
                ValidationKind::Arity,
                format!("{} expects {expected} input(s), got {got}", self.stage.op.kind()),
            ))
        }
    }

    fn outputs(&self, n: usize) -> Result<(), ValidationError> {
        if self.stage.outputs.len() == n {
            Ok(())
        } else {
            Err(self.err(
                ValidationKind::Arity,
                format!(
                    "{} produces {n} output(s), {} named",
                    self.stage.op.kind(),
                    self.stage.outputs.len()
                ),
            ))
        }
    }

    fn dtype_mismatch(&self, message: impl Into<String>) -> ValidationError {
        self.err(ValidationKind::DTypeMismatch, message)
    }

    fn shape_mismatch(&self, message: impl Into<String>) -> ValidationError {
        self.err(ValidationKind::ShapeMismatch, message)
    }

    /// Converts to string, accepting any scalar dtype.
    fn stringish(&self, _dtype: DType) -> DType {
        DType::String
    }

    fn numeric(&self, field: &FieldSpec, dtype: DType) -> Result<DType, ValidationError> {
        if dtype.is_numeric() {
            Ok(DType::Float64)
        } else {
            Err(self.dtype_mismatch(format!(
                "`{}` is {dtype}, expected a numeric column",
                field.name
            )))
        }
    }

    fn exact(&self, field: &FieldSpec, dtype: DType, want: DType) -> Result<DType, ValidationError> {
        if dtype == want {
            Ok(want)
        } else {
            Err(self.dtype_mismatch(format!("`{}` is {dtype}, expected {want}", field.name)))
        }
    }

    fn max_rank(&self, field: &FieldSpec, rank: usize) -> Result<(), ValidationError> {
        if field.shape.rank() <= rank {
            Ok(())
        } else {
            Err(self.shape_mismatch(format!(
                "`{}` has shape {}, at most rank {rank} supported here",
                field.name, field.shape
            )))
        }
    }

    fn min_rank(&self, field: &FieldSpec, rank: usize) -> Result<(), ValidationError> {
        if field.shape.rank() >= rank {
            Ok(())
        } else {
            Err(self.shape_mismatch(format!(
                "`{}` has shape {}, expected a list",
                field.name, field.shape
            )))
        }
    }

    /// All non-scalar shapes must agree; scalars broadcast.
    fn broadcast(&self, fields: &[&FieldSpec]) -> Result<ShapeSpec, ValidationError> {
        let mut out: Option<&ShapeSpec> = None;
        for f in fields.iter().filter(|f| !f.shape.is_scalar()) {
            match out {
                None => out = Some(&f.shape),
                Some(s) if dims_compatible(s, &f.shape) => {
                    if !s.is_fixed() && f.shape.is_fixed() {
                        out = Some(&f.shape);
                    }
                }
                Some(s) => {
                    return Err(self.shape_mismatch(format!(
                        "cannot combine shapes {s} and {} (only scalars broadcast)",
                        f.shape
                    )))
                }
            }
        }
        Ok(out.cloned().unwrap_or_default())
    }

    fn shape(&self, r: Result<ShapeSpec, crate::error::SchemaError>) -> Result<ShapeSpec, ValidationError> {
        r.map_err(|e| self.shape_mismatch(e.to_string()))
    }
}

impl StageDef {
    /// Resolves input fields against `schema` and derives the output fields.
    /// Estimators without `state` infer a pre-fit signature in which
    /// state-dependent dims are variable.
    pub fn infer(&self, schema: &Schema, state: Option<&FittedState>) -> Result<Signature, ValidationError> {
        let ctx = Ctx { stage: self };
        let mut sources = Vec::with_capacity(self.inputs.len());
        for name in &self.inputs {
            let field = schema.field(name).ok_or_else(|| {
                ctx.err(ValidationKind::UnknownColumn, format!("unknown input column `{name}`"))
            })?;
            sources.push(field.clone());
        }
        for name in &self.outputs {
            validate_name(name).map_err(|e| ctx.err(ValidationKind::InvalidParams, e.to_string()))?;
        }
        // Dtypes after the explicit inputDtype conversion.
        let mut dtypes = Vec::with_capacity(sources.len());
        for f in &sources {
            match self.input_dtype {
                Some(t) if !coercible(f.dtype, t) => {
                    return Err(ctx.dtype_mismatch(format!("`{}` ({}) cannot be converted to {t}", f.name, f.dtype)))
                }
                Some(t) => dtypes.push(t),
                None => dtypes.push(f.dtype),
            }
        }
        check_state(&ctx, self.op.kind(), state)?;

        let n = sources.len();
        let mut constant = None;
        let mut if_true = None;
        let mut if_false = None;
        let out_name = |i: usize| self.outputs.get(i).cloned().unwrap_or_default();

        let (operand_dtypes, outputs): (Vec<DType>, Vec<FieldSpec>) = match &self.op {
            Op::HashIndex(_) | Op::StringIndex(_) => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                let shape = sources[0].shape.clone();
                (
                    vec![ctx.stringish(dtypes[0])],
                    vec![FieldSpec::new(out_name(0), DType::Int64, shape)],
                )
            }
            Op::SharedStringIndex(_) => {
                ctx.arity(n, n >= 1, "at least 1")?;
                ctx.outputs(n)?;
                (
                    dtypes.iter().map(|d| ctx.stringish(*d)).collect(),
                    sources
                        .iter()
                        .enumerate()
                        .map(|(i, f)| FieldSpec::new(out_name(i), DType::Int64, f.shape.clone()))
                        .collect(),
                )
            }
            Op::BloomEncode(p) => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                ctx.max_rank(&sources[0], 1)?;
                let shape = ctx.shape(sources[0].shape.push_inner(Dim::Fixed(p.num_hashes as usize)))?;
                (
                    vec![DType::String],
                    vec![FieldSpec::new(out_name(0), DType::Int64, shape)],
                )
            }
            Op::OneHotEncode(p) => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                ctx.max_rank(&sources[0], 1)?;
                let width = match state {
                    Some(FittedState::Vocabulary { labels }) => Dim::Fixed(if p.drop_unseen {
                        labels.len()
                    } else {
                        labels.len() + p.num_oov_indices as usize
                    }),
                    _ => Dim::Variable,
                };
                if width == Dim::Fixed(0) {
                    return Err(ctx.shape_mismatch("one-hot width is zero"));
                }
                let shape = ctx.shape(sources[0].shape.push_inner(width))?;
                (
                    vec![DType::String],
                    vec![FieldSpec::new(out_name(0), DType::Float64, shape)],
                )
            }
            Op::LogTransform(_) => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                let d = ctx.numeric(&sources[0], dtypes[0])?;
                (vec![d], vec![FieldSpec::new(out_name(0), DType::Float64, sources[0].shape.clone())])
            }
            Op::Arithmetic(p) => {
                match p.constant {
                    Some(_) => ctx.arity(n, n == 1, "1 (with constant)")?,
                    None => ctx.arity(n, n == 2, "2 (without constant)")?,
                }
                ctx.outputs(1)?;
                let ds = sources
                    .iter()
                    .zip(&dtypes)
                    .map(|(f, d)| ctx.numeric(f, *d))
                    .collect::<Result<Vec<_>, _>>()?;
                let refs: Vec<&FieldSpec> = sources.iter().collect();
                let shape = ctx.broadcast(&refs)?;
                (ds, vec![FieldSpec::new(out_name(0), DType::Float64, shape)])
            }
            Op::StringToList(p) => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                ctx.max_rank(&sources[0], 1)?;
                let shape = ctx.shape(sources[0].shape.push_inner(Dim::Fixed(p.list_length)))?;
                (
                    vec![ctx.stringish(dtypes[0])],
                    vec![FieldSpec::new(out_name(0), DType::String, shape)],
                )
            }
            Op::RegexExtract(_) | Op::StringCase(_) => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                (
                    vec![ctx.stringish(dtypes[0])],
                    vec![FieldSpec::new(out_name(0), DType::String, sources[0].shape.clone())],
                )
            }
            Op::StringConcat(_) => {
                ctx.arity(n, n >= 1, "at least 1")?;
                ctx.outputs(1)?;
                let refs: Vec<&FieldSpec> = sources.iter().collect();
                let shape = ctx.broadcast(&refs)?;
                (
                    dtypes.iter().map(|d| ctx.stringish(*d)).collect(),
                    vec![FieldSpec::new(out_name(0), DType::String, shape)],
                )
            }
            Op::DateDecompose(_) => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                let d = ctx.exact(&sources[0], dtypes[0], DType::String)?;
                (vec![d], vec![FieldSpec::new(out_name(0), DType::Int64, sources[0].shape.clone())])
            }
            Op::DateDiffDays => {
                ctx.arity(n, n == 2, "2")?;
                ctx.outputs(1)?;
                let ds = sources
                    .iter()
                    .zip(&dtypes)
                    .map(|(f, d)| ctx.exact(f, *d, DType::String))
                    .collect::<Result<Vec<_>, _>>()?;
                let shape = ctx.broadcast(&[&sources[0], &sources[1]])?;
                (ds, vec![FieldSpec::new(out_name(0), DType::Int64, shape)])
            }
            Op::HaversineKm => {
                ctx.arity(n, n == 4, "4 (lat1, lon1, lat2, lon2)")?;
                ctx.outputs(1)?;
                let ds = sources
                    .iter()
                    .zip(&dtypes)
                    .map(|(f, d)| ctx.numeric(f, *d))
                    .collect::<Result<Vec<_>, _>>()?;
                let refs: Vec<&FieldSpec> = sources.iter().collect();
                let shape = ctx.broadcast(&refs)?;
                (ds, vec![FieldSpec::new(out_name(0), DType::Float64, shape)])
            }
            Op::Logical(p) => {
                let want = p.kind.arity();
                ctx.arity(n, n == want, &want.to_string())?;
                ctx.outputs(1)?;
                let ds = sources
                    .iter()
                    .zip(&dtypes)
                    .map(|(f, d)| ctx.exact(f, *d, DType::Bool))
                    .collect::<Result<Vec<_>, _>>()?;
                let refs: Vec<&FieldSpec> = sources.iter().collect();
                let shape = ctx.broadcast(&refs)?;
                (ds, vec![FieldSpec::new(out_name(0), DType::Bool, shape)])
            }
            Op::Compare(p) => {
                match &p.constant {
                    Some(c) => {
                        ctx.arity(n, n == 1, "1 (with constant)")?;
                        constant = Some(typed_constant(c, dtypes[0]).ok_or_else(|| {
                            ctx.dtype_mismatch(format!("constant {c} is not a {} value", dtypes[0]))
                        })?);
                    }
                    None => {
                        ctx.arity(n, n == 2, "2 (without constant)")?;
                        if dtypes[0] != dtypes[1] {
                            return Err(ctx.dtype_mismatch(format!(
                                "cannot compare {} with {}",
                                dtypes[0], dtypes[1]
                            )));
                        }
                    }
                }
                ctx.outputs(1)?;
                let refs: Vec<&FieldSpec> = sources.iter().collect();
                let shape = ctx.broadcast(&refs)?;
                (dtypes.clone(), vec![FieldSpec::new(out_name(0), DType::Bool, shape)])
            }
            Op::ConditionalSelect(p) => {
                let want = 1 + usize::from(p.if_true.is_none()) + usize::from(p.if_false.is_none());
                ctx.arity(n, n == want, &want.to_string())?;
                ctx.outputs(1)?;
                ctx.exact(&sources[0], dtypes[0], DType::Bool)?;
                let branch_dtype = match (&p.if_true, &p.if_false) {
                    (None, _) => dtypes[1],
                    (Some(_), None) => dtypes[1],
                    (Some(t), Some(f)) => {
                        let (dt, df) = (constant_dtype(t), constant_dtype(f));
                        match (dt, df) {
                            (Some(a), Some(b)) if a == b => a,
                            (Some(DType::Int64), Some(DType::Float64))
                            | (Some(DType::Float64), Some(DType::Int64)) => DType::Float64,
                            _ => return Err(ctx.dtype_mismatch(format!("branch constants {t} and {f} differ in type"))),
                        }
                    }
                };
                if p.if_true.is_none() && p.if_false.is_none() && dtypes[1] != dtypes[2] {
                    return Err(ctx.dtype_mismatch(format!(
                        "branches are {} and {}",
                        dtypes[1], dtypes[2]
                    )));
                }
                let typed = |c: &serde_json::Value| {
                    typed_constant(c, branch_dtype).ok_or_else(|| {
                        ctx.dtype_mismatch(format!("constant {c} is not a {branch_dtype} value"))
                    })
                };
                if_true = p.if_true.as_ref().map(typed).transpose()?;
                if_false = p.if_false.as_ref().map(typed).transpose()?;
                let branches: Vec<&FieldSpec> = sources[1..].iter().collect();
                if branches.len() == 2 && !dims_compatible(&branches[0].shape, &branches[1].shape) {
                    return Err(ctx.shape_mismatch(format!(
                        "branches have shapes {} and {}",
                        branches[0].shape, branches[1].shape
                    )));
                }
                let refs: Vec<&FieldSpec> = sources.iter().collect();
                let shape = ctx.broadcast(&refs)?;
                let mut ds = vec![DType::Bool];
                ds.extend(dtypes[1..].iter().copied());
                (ds, vec![FieldSpec::new(out_name(0), branch_dtype, shape)])
            }
            Op::ArrayAssemble => {
                ctx.arity(n, n >= 1, "at least 1")?;
                ctx.outputs(1)?;
                for (f, d) in sources.iter().zip(&dtypes).skip(1) {
                    ctx.exact(f, *d, dtypes[0])?;
                    if !dims_compatible(&f.shape, &sources[0].shape) {
                        return Err(ctx.shape_mismatch(format!(
                            "`{}` has shape {}, `{}` has {}",
                            f.name, f.shape, sources[0].name, sources[0].shape
                        )));
                    }
                }
                ctx.max_rank(&sources[0], 1)?;
                let shape = ctx.shape(sources[0].shape.push_outer(Dim::Fixed(n)))?;
                (dtypes.clone(), vec![FieldSpec::new(out_name(0), dtypes[0], shape)])
            }
            Op::ArrayDisassemble => {
                ctx.arity(n, n == 1, "1")?;
                ctx.min_rank(&sources[0], 1)?;
                if let Some(Dim::Fixed(len)) = sources[0].shape.outer() {
                    ctx.outputs(len)?;
                }
                let inner = sources[0].shape.pop_outer();
                (
                    dtypes.clone(),
                    self.outputs
                        .iter()
                        .map(|o| FieldSpec::new(o.clone(), dtypes[0], inner.clone()))
                        .collect(),
                )
            }
            Op::ArraySlice(p) => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                ctx.min_rank(&sources[0], 1)?;
                if let Some(Dim::Fixed(len)) = sources[0].shape.inner() {
                    if p.start + p.length > len {
                        return Err(ctx.err(
                            ValidationKind::ShapeMismatch,
                            format!(
                                "IndexOutOfRange: slice [{}, {}) exceeds list length {len}",
                                p.start,
                                p.start + p.length
                            ),
                        ));
                    }
                }
                let shape = sources[0].shape.with_inner(Dim::Fixed(p.length));
                (dtypes.clone(), vec![FieldSpec::new(out_name(0), dtypes[0], shape)])
            }
            Op::ListAggregate(p) => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                ctx.min_rank(&sources[0], 1)?;
                if !dtypes[0].is_numeric() {
                    return Err(ctx.dtype_mismatch(format!("`{}` is {}, expected numeric", sources[0].name, dtypes[0])));
                }
                let out = if p.kind == AggKind::Mean { DType::Float64 } else { dtypes[0] };
                (dtypes.clone(), vec![FieldSpec::new(out_name(0), out, sources[0].shape.pop_inner())])
            }
            Op::Cast(p) => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                if !coercible(dtypes[0], p.dtype) {
                    return Err(ctx.dtype_mismatch(format!("{} cannot be cast to {}", dtypes[0], p.dtype)));
                }
                (vec![p.dtype], vec![FieldSpec::new(out_name(0), p.dtype, sources[0].shape.clone())])
            }
            Op::StandardScale => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                ctx.max_rank(&sources[0], 1)?;
                let d = ctx.numeric(&sources[0], dtypes[0])?;
                if let Some(FittedState::Moments { mean, .. }) = state {
                    let expected = match sources[0].shape.inner() {
                        None => Some(1),
                        Some(d) => d.fixed(),
                    };
                    if expected.is_some_and(|e| e != mean.len()) {
                        return Err(ctx.shape_mismatch(format!(
                            "scaler has {} positions, input shape is {}",
                            mean.len(),
                            sources[0].shape
                        )));
                    }
                }
                (vec![d], vec![FieldSpec::new(out_name(0), DType::Float64, sources[0].shape.clone())])
            }
            Op::Impute(_) => {
                ctx.arity(n, n == 1, "1")?;
                ctx.outputs(1)?;
                let d = ctx.numeric(&sources[0], dtypes[0])?;
                (vec![d], vec![FieldSpec::new(out_name(0), DType::Float64, sources[0].shape.clone())])
            }
        };

        if let (Some(FittedState::Vocabulary { labels }), Some(vp)) = (state, self.op.vocab_params()) {
            VocabIndex::new(labels, vp.num_oov_indices, vp.mask_token.as_deref())
                .map_err(|e| ctx.err(ValidationKind::InvalidParams, e.to_string()))?;
        }

        Ok(Signature {
            sources,
            operand_dtypes,
            outputs,
            constant,
            if_true,
            if_false,
        })
    }
}

fn check_state(ctx: &Ctx<'_>, kind: OpKind, state: Option<&FittedState>) -> Result<(), ValidationError> {
    let Some(state) = state else {
        return Ok(());
    };
    let ok = match kind {
        OpKind::StringIndex | OpKind::SharedStringIndex | OpKind::OneHotEncode => {
            matches!(state, FittedState::Vocabulary { .. })
        }
        OpKind::StandardScale => matches!(state, FittedState::Moments { mean, std } if mean.len() == std.len() && !mean.is_empty()),
        OpKind::Impute => matches!(state, FittedState::Impute { .. }),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(ctx.err(
            ValidationKind::MissingState,
            format!("state does not match op {kind}"),
        ))
    }
}

/// Runs inference over an ordered stage list, extending the schema with each
/// stage's outputs.
pub fn infer_chain<'a>(
    inputs: &Schema,
    stages: impl IntoIterator<Item = (&'a StageDef, Option<&'a FittedState>)>,
) -> Result<(Schema, Vec<Signature>), ValidationError> {
    let mut schema = inputs.clone();
    let mut sigs = Vec::new();
    for (stage, state) in stages {
        let sig = stage.infer(&schema, state)?;
        for f in &sig.outputs {
            schema.push(f.clone()).map_err(|e| {
                ValidationError::new(&stage.name, ValidationKind::InvalidParams, e.to_string())
            })?;
        }
        sigs.push(sig);
    }
    Ok((schema, sigs))
}
