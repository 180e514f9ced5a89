//! Data types, shapes and schemas.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SchemaError;

pub const MAX_RANK: usize = 2;

/// Element type of a column. Integer inputs are widened to `int64` and
/// floats to `float64` on ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DType {
    Int64,
    Float64,
    Bool,
    String,
}

impl DType {
    pub fn name(self) -> &'static str {
        match self {
            DType::Int64 => "int64",
            DType::Float64 => "float64",
            DType::Bool => "bool",
            DType::String => "string",
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, DType::Int64 | DType::Float64)
    }
}

impl fmt::Display for DType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown dtype `{0}`")]
pub struct UnknownDType(pub String);

impl FromStr for DType {
    type Err = UnknownDType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "int64" | "int32" | "int16" | "int8" | "int" | "integer" | "long" => Ok(DType::Int64),
            "float64" | "float32" | "float" | "double" => Ok(DType::Float64),
            "bool" | "boolean" => Ok(DType::Bool),
            "string" | "str" | "utf8" => Ok(DType::String),
            other => Err(UnknownDType(other.to_string())),
        }
    }
}

impl Serialize for DType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for DType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One list dimension. `Variable` only appears in statically inferred
/// schemas before fitting (e.g. one-hot width depends on the vocabulary).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    Fixed(usize),
    Variable,
}

impl Dim {
    pub fn fixed(self) -> Option<usize> {
        match self {
            Dim::Fixed(n) => Some(n),
            Dim::Variable => None,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Fixed(n) => write!(f, "{n}"),
            Dim::Variable => f.write_str("?"),
        }
    }
}

/// Shape of one cell: scalar, `list[L]` or `list[N][L]`. Dims are ordered
/// outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ShapeSpec {
    dims: Vec<Dim>,
}

impl ShapeSpec {
    pub fn scalar() -> Self {
        ShapeSpec { dims: Vec::new() }
    }

    pub fn list(len: usize) -> Self {
        ShapeSpec {
            dims: vec![Dim::Fixed(len)],
        }
    }

    pub fn nested(outer: usize, inner: usize) -> Self {
        ShapeSpec {
            dims: vec![Dim::Fixed(outer), Dim::Fixed(inner)],
        }
    }

    pub fn from_dims(dims: Vec<Dim>) -> Result<Self, SchemaError> {
        if dims.len() > MAX_RANK {
            return Err(SchemaError::RankTooHigh(dims.len()));
        }
        if dims.contains(&Dim::Fixed(0)) {
            return Err(SchemaError::ZeroDim);
        }
        Ok(ShapeSpec { dims })
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn is_scalar(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn is_fixed(&self) -> bool {
        self.dims.iter().all(|d| matches!(d, Dim::Fixed(_)))
    }

    /// Fixed dims, or `None` if any dim is still variable.
    pub fn fixed_dims(&self) -> Option<Vec<usize>> {
        self.dims.iter().map(|d| d.fixed()).collect()
    }

    /// Number of leaves per cell (1 for scalars).
    pub fn leaf_count(&self) -> Option<usize> {
        self.dims
            .iter()
            .try_fold(1usize, |acc, d| d.fixed().map(|n| acc * n))
    }

    pub fn inner(&self) -> Option<Dim> {
        self.dims.last().copied()
    }

    pub fn outer(&self) -> Option<Dim> {
        self.dims.first().copied()
    }

    /// Appends an innermost dimension.
    pub fn push_inner(&self, dim: Dim) -> Result<Self, SchemaError> {
        let mut dims = self.dims.clone();
        dims.push(dim);
        ShapeSpec::from_dims(dims)
    }

    /// Prepends an outermost dimension.
    pub fn push_outer(&self, dim: Dim) -> Result<Self, SchemaError> {
        let mut dims = vec![dim];
        dims.extend_from_slice(&self.dims);
        ShapeSpec::from_dims(dims)
    }

    pub fn pop_inner(&self) -> Self {
        let mut dims = self.dims.clone();
        dims.pop();
        ShapeSpec { dims }
    }

    pub fn pop_outer(&self) -> Self {
        ShapeSpec {
            dims: self.dims.iter().skip(1).copied().collect(),
        }
    }

    pub fn with_inner(&self, dim: Dim) -> Self {
        let mut dims = self.dims.clone();
        if let Some(last) = dims.last_mut() {
            *last = dim;
        }
        ShapeSpec { dims }
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dims.is_empty() {
            return f.write_str("scalar");
        }
        f.write_str("list")?;
        for d in &self.dims {
            write!(f, "[{d}]")?;
        }
        Ok(())
    }
}

impl Serialize for ShapeSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let dims: Vec<Option<usize>> = self.dims.iter().map(|d| d.fixed()).collect();
        dims.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ShapeSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<Option<usize>>::deserialize(deserializer)?;
        let dims = raw
            .into_iter()
            .map(|d| d.map_or(Dim::Variable, Dim::Fixed))
            .collect();
        ShapeSpec::from_dims(dims).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    pub dtype: DType,
    #[serde(default)]
    pub shape: ShapeSpec,
}

impl FieldSpec {
    pub fn new(name: impl Into<String>, dtype: DType, shape: ShapeSpec) -> Self {
        FieldSpec {
            name: name.into(),
            dtype,
            shape,
        }
    }

    pub fn scalar(name: impl Into<String>, dtype: DType) -> Self {
        FieldSpec::new(name, dtype, ShapeSpec::scalar())
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} {}", self.name, self.dtype, self.shape)
    }
}

pub fn validate_name(name: &str) -> Result<(), SchemaError> {
    if name.is_empty() || name.contains('/') {
        return Err(SchemaError::InvalidName(name.to_string()));
    }
    Ok(())
}

/// An ordered set of uniquely named fields.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema {
    fields: Vec<FieldSpec>,
    index: HashMap<String, usize>,
}

impl Schema {
    pub fn new(fields: Vec<FieldSpec>) -> Result<Self, SchemaError> {
        let mut index = HashMap::with_capacity(fields.len());
        for (i, field) in fields.iter().enumerate() {
            validate_name(&field.name)?;
            if index.insert(field.name.clone(), i).is_some() {
                return Err(SchemaError::DuplicateField(field.name.clone()));
            }
        }
        Ok(Schema { fields, index })
    }

    pub fn empty() -> Self {
        Schema::default()
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn field(&self, name: &str) -> Option<&FieldSpec> {
        self.index_of(name).map(|i| &self.fields[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|f| f.name.as_str())
    }

    pub fn push(&mut self, field: FieldSpec) -> Result<(), SchemaError> {
        validate_name(&field.name)?;
        if self.index.contains_key(&field.name) {
            return Err(SchemaError::DuplicateField(field.name));
        }
        self.index.insert(field.name.clone(), self.fields.len());
        self.fields.push(field);
        Ok(())
    }

    /// Rejects any variable dimension.
    pub fn require_fixed(&self) -> Result<(), SchemaError> {
        match self.fields.iter().find(|f| !f.shape.is_fixed()) {
            Some(f) => Err(SchemaError::VariableDim {
                field: f.name.clone(),
            }),
            None => Ok(()),
        }
    }
}

impl Serialize for Schema {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.fields.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Schema {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let fields = Vec::<FieldSpec>::deserialize(deserializer)?;
        Schema::new(fields).map_err(serde::de::Error::custom)
    }
}
