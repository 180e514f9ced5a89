//! Nullable cells, canonical rendering and dtype coercion.

use std::fmt;

use crate::error::{ErrorKind, OpError};
use crate::schema::{DType, Dim, FieldSpec, ShapeSpec};

/// One cell: null, a scalar, or a list of cells (nesting depth at most 2).
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Value {
    #[default]
    Null,
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    List(Vec<Value>),
}

impl Value {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// Dtype of a non-null scalar.
    pub fn scalar_dtype(&self) -> Option<DType> {
        match self {
            Value::Int(_) => Some(DType::Int64),
            Value::Float(_) => Some(DType::Float64),
            Value::Bool(_) => Some(DType::Bool),
            Value::Str(_) => Some(DType::String),
            Value::Null | Value::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn str(s: impl Into<String>) -> Value {
        Value::Str(s.into())
    }

    pub fn list<T: Into<Value>>(items: impl IntoIterator<Item = T>) -> Value {
        Value::List(items.into_iter().map(Into::into).collect())
    }

    /// Checks dtype, nesting and list lengths against a field definition.
    pub fn conforms_to(&self, field: &FieldSpec) -> Result<(), String> {
        conform(self, field.dtype, field.shape.dims())
    }
}

fn conform(value: &Value, dtype: DType, dims: &[Dim]) -> Result<(), String> {
    match (value, dims.split_first()) {
        (Value::Null, _) => Ok(()),
        (Value::List(items), Some((dim, rest))) => {
            if let Dim::Fixed(n) = dim {
                if items.len() != *n {
                    return Err(format!("expected a list of length {n}, got {}", items.len()));
                }
            }
            items.iter().try_for_each(|v| conform(v, dtype, rest))
        }
        (Value::List(_), None) => Err(format!("expected a {dtype} scalar, got a list")),
        (scalar, Some(_)) => Err(format!("expected a list, got scalar {scalar}")),
        (scalar, None) => match scalar.scalar_dtype() {
            Some(d) if d == dtype => Ok(()),
            Some(d) => Err(format!("expected {dtype}, got {d} value {scalar}")),
            None => unreachable!("lists and nulls handled above"),
        },
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
            scalar => f.write_str(&canonical_render(scalar).unwrap_or_default()),
        }
    }
}

/// Shortest round-trip decimal for finite floats; `NaN`, `Infinity` and
/// `-Infinity` otherwise.
pub fn render_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "Infinity" } else { "-Infinity" }.to_string()
    } else {
        ryu::Buffer::new().format_finite(x).to_string()
    }
}

pub fn render_bool(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Deterministic string form of a non-null scalar; `None` for nulls and lists.
pub fn canonical_render(value: &Value) -> Option<String> {
    match value {
        Value::Int(i) => Some(i.to_string()),
        Value::Float(x) => Some(render_f64(*x)),
        Value::Bool(b) => Some(render_bool(*b).to_string()),
        Value::Str(s) => Some(s.clone()),
        Value::Null | Value::List(_) => None,
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "NaN" => Some(f64::NAN),
        "Infinity" => Some(f64::INFINITY),
        "-Infinity" => Some(f64::NEG_INFINITY),
        _ => s.parse::<f64>().ok(),
    }
}

pub fn f64_to_i64(x: f64) -> Result<i64, OpError> {
    // i64::MAX as f64 rounds up to 2^63, which is out of range.
    const LIMIT: f64 = 9_223_372_036_854_775_808.0;
    if x.fract() != 0.0 || !x.is_finite() {
        return Err(OpError::new(
            ErrorKind::Coercion,
            format!("cannot convert non-integral float {} to int64", render_f64(x)),
        ));
    }
    if !(-LIMIT..LIMIT).contains(&x) {
        return Err(OpError::new(
            ErrorKind::Coercion,
            format!("float {} is out of int64 range", render_f64(x)),
        ));
    }
    Ok(x as i64)
}

fn coerce_error(value: &Value, target: DType) -> OpError {
    OpError::new(
        ErrorKind::Coercion,
        format!("cannot coerce {value} to {target}"),
    )
}

/// Converts a scalar to `target`. Nulls stay null.
pub fn coerce_scalar(value: &Value, target: DType) -> Result<Value, OpError> {
    let out = match (value, target) {
        (Value::Null, _) => Value::Null,
        (Value::List(_), _) => {
            return Err(OpError::new(ErrorKind::ShapeMismatch, "expected a scalar, got a list"))
        }
        (Value::Int(i), DType::Int64) => Value::Int(*i),
        (Value::Int(i), DType::Float64) => Value::Float(*i as f64),
        (Value::Float(x), DType::Float64) => Value::Float(*x),
        (Value::Float(x), DType::Int64) => Value::Int(f64_to_i64(*x)?),
        (Value::Bool(b), DType::Bool) => Value::Bool(*b),
        (Value::Bool(b), DType::Int64) => Value::Int(i64::from(*b)),
        (Value::Bool(b), DType::Float64) => Value::Float(if *b { 1.0 } else { 0.0 }),
        (Value::Str(s), DType::String) => Value::Str(s.clone()),
        (Value::Str(s), DType::Int64) => {
            Value::Int(s.parse::<i64>().map_err(|_| coerce_error(value, target))?)
        }
        (Value::Str(s), DType::Float64) => {
            Value::Float(parse_f64(s).ok_or_else(|| coerce_error(value, target))?)
        }
        (Value::Str(s), DType::Bool) => match s.as_str() {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => return Err(coerce_error(value, target)),
        },
        (scalar, DType::String) => Value::Str(canonical_render(scalar).expect("scalar")),
        (Value::Int(_) | Value::Float(_), DType::Bool) => return Err(coerce_error(value, target)),
    };
    Ok(out)
}

/// Converts every leaf of `value` to `target`, preserving nesting.
pub fn coerce(value: &Value, target: DType) -> Result<Value, OpError> {
    match value {
        Value::List(items) => items
            .iter()
            .map(|v| coerce(v, target))
            .collect::<Result<Vec<_>, _>>()
            .map(Value::List),
        scalar => coerce_scalar(scalar, target),
    }
}

/// Whether `from` can ever be coerced to `to` (some values may still fail).
pub fn coercible(from: DType, to: DType) -> bool {
    !matches!(
        (from, to),
        (DType::Int64 | DType::Float64, DType::Bool)
    )
}

/// Shape of a value if it is a well-formed nested list of scalars; nulls
/// match any shape and are reported as `None`.
pub fn value_shape(value: &Value) -> Option<ShapeSpec> {
    match value {
        Value::Null => None,
        Value::List(items) => {
            let inner = items.iter().find_map(value_shape).unwrap_or_default();
            inner.push_outer(Dim::Fixed(items.len())).ok()
        }
        _ => Some(ShapeSpec::scalar()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coerce_examples() {
        assert_eq!(coerce(&Value::Int(42), DType::String).unwrap(), Value::str("42"));
        assert_eq!(coerce(&Value::Null, DType::Float64).unwrap(), Value::Null);
        let err = coerce(&Value::str("3.5"), DType::Int64).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Coercion);
        assert_eq!(coerce(&Value::Bool(true), DType::Int64).unwrap(), Value::Int(1));
        assert_eq!(coerce(&Value::Float(4.0), DType::Int64).unwrap(), Value::Int(4));
        assert!(coerce(&Value::Float(4.5), DType::Int64).is_err());
        assert!(coerce(&Value::Float(1e19), DType::Int64).is_err());
        assert!(coerce(&Value::Int(1), DType::Bool).is_err());
        assert_eq!(
            coerce(&Value::list([Value::Int(1), Value::Null]), DType::String).unwrap(),
            Value::list([Value::str("1"), Value::Null])
        );
    }

    #[test]
    fn render_examples() {
        assert_eq!(canonical_render(&Value::Int(100)).unwrap(), "100");
        assert_eq!(canonical_render(&Value::Int(-7)).unwrap(), "-7");
        assert_eq!(canonical_render(&Value::Bool(true)).unwrap(), "true");
        assert_eq!(canonical_render(&Value::str("x")).unwrap(), "x");
        assert!(canonical_render(&Value::Null).is_none());
    }

    // Golden float renderings (shortest round-trip).
    #[test]
    fn render_float_goldens() {
        let cases = [
            (2.5, "2.5"),
            (3.0, "3.0"),
            (-0.0, "-0.0"),
            (0.1, "0.1"),
            (1e21, "1e21"),
            (1e-7, "1e-7"),
            (123456.789, "123456.789"),
            (f64::NAN, "NaN"),
            (f64::INFINITY, "Infinity"),
            (f64::NEG_INFINITY, "-Infinity"),
        ];
        for (x, expected) in cases {
            assert_eq!(render_f64(x), expected, "{x:?}");
        }
    }

    #[test]
    fn conformance() {
        let f = FieldSpec::new("g", DType::String, ShapeSpec::list(2));
        assert!(Value::list(["a", "b"]).conforms_to(&f).is_ok());
        assert!(Value::list([Value::str("a"), Value::Null]).conforms_to(&f).is_ok());
        assert!(Value::Null.conforms_to(&f).is_ok());
        assert!(Value::list(["a"]).conforms_to(&f).is_err());
        assert!(Value::str("a").conforms_to(&f).is_err());
        assert!(Value::list([1i64, 2]).conforms_to(&f).is_err());
    }

    fn scalar() -> impl Strategy<Value = Value> {
        prop_oneof![
            Just(Value::Null),
            any::<i64>().prop_map(Value::Int),
            any::<f64>().prop_map(Value::Float),
            any::<bool>().prop_map(Value::Bool),
            "[a-z0-9.\\-]{0,6}".prop_map(Value::Str),
        ]
    }

    fn dtype() -> impl Strategy<Value = DType> {
        prop_oneof![
            Just(DType::Int64),
            Just(DType::Float64),
            Just(DType::Bool),
            Just(DType::String)
        ]
    }

    fn same(a: &Value, b: &Value) -> bool {
        match (a, b) {
            (Value::Float(x), Value::Float(y)) => x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()),
            (Value::List(x), Value::List(y)) => x.len() == y.len() && x.iter().zip(y).all(|(a, b)| same(a, b)),
            _ => a == b,
        }
    }

    proptest! {
        #[test]
        fn coerce_is_idempotent(v in scalar(), t in dtype()) {
            if let Ok(once) = coerce(&v, t) {
                let twice = coerce(&once, t).unwrap();
                prop_assert!(same(&once, &twice), "{once} vs {twice}");
            }
        }

        #[test]
        fn coerce_is_elementwise(items in proptest::collection::vec(scalar(), 0..5), t in dtype()) {
            let list = Value::List(items.clone());
            match coerce(&list, t) {
                Ok(Value::List(out)) => {
                    for (a, b) in items.iter().zip(&out) {
                        prop_assert!(same(&coerce(a, t).unwrap(), b));
                    }
                }
                Ok(_) => prop_assert!(false),
                Err(_) => prop_assert!(items.iter().any(|v| coerce(v, t).is_err())),
            }
        }

        #[test]
        fn int_and_bool_rendering_is_injective(a in any::<i64>(), b in any::<i64>()) {
            let ra = canonical_render(&Value::Int(a)).unwrap();
            let rb = canonical_render(&Value::Int(b)).unwrap();
            prop_assert_eq!(a == b, ra == rb);
            prop_assert_ne!(render_bool(true), render_bool(false));
        }

        #[test]
        fn finite_float_rendering_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let back = parse_f64(&render_f64(x)).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
