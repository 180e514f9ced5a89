use serde::{Deserialize, Serialize};

use crate::error::{ErrorKind, OpError};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LogicalKind {
    And,
    Or,
    Not,
    Xor,
}

impl LogicalKind {
    pub fn arity(self) -> usize {
        if self == LogicalKind::Not {
            1
        } else {
            2
        }
    }

    /// For `Not` the second operand is ignored.
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            LogicalKind::And => a && b,
            LogicalKind::Or => a || b,
            LogicalKind::Not => !a,
            LogicalKind::Xor => a ^ b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CompareKind {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareKind {
    /// IEEE semantics for floats: every ordering involving NaN is false
    /// except `Ne`.
    #[inline]
    pub fn apply<T: PartialOrd + ?Sized>(self, a: &T, b: &T) -> bool {
        match self {
            CompareKind::Eq => a == b,
            CompareKind::Ne => a != b,
            CompareKind::Lt => a < b,
            CompareKind::Le => a <= b,
            CompareKind::Gt => a > b,
            CompareKind::Ge => a >= b,
        }
    }
}

/// Compares two non-null scalars of the same dtype. Strings order by code
/// point.
pub fn compare_values(kind: CompareKind, a: &Value, b: &Value) -> Result<bool, OpError> {
    Ok(match (a, b) {
        (Value::Int(x), Value::Int(y)) => kind.apply(x, y),
        (Value::Float(x), Value::Float(y)) => kind.apply(x, y),
        (Value::Bool(x), Value::Bool(y)) => kind.apply(x, y),
        (Value::Str(x), Value::Str(y)) => kind.apply(x.as_str(), y.as_str()),
        _ => {
            return Err(OpError::new(
                ErrorKind::DTypeMismatch,
                format!("cannot compare {a} with {b}"),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!(!LogicalKind::And.apply(true, false));
        assert!(LogicalKind::Xor.apply(true, false));
        assert!(!LogicalKind::Not.apply(true, true));
        assert!(compare_values(CompareKind::Lt, &Value::str("a"), &Value::str("b")).unwrap());
        let err = compare_values(CompareKind::Eq, &Value::Int(1), &Value::str("1")).unwrap_err();
        assert_eq!(err.kind, ErrorKind::DTypeMismatch);
    }

    #[test]
    fn strings_order_by_code_point() {
        assert!(CompareKind::Lt.apply("Z", "a"));
        assert!(CompareKind::Lt.apply("z", "é"));
        assert!(CompareKind::Lt.apply("", "a"));
    }

    #[test]
    fn nan_comparisons() {
        let nan = f64::NAN;
        assert!(!CompareKind::Eq.apply(&nan, &nan));
        assert!(CompareKind::Ne.apply(&nan, &1.0));
        assert!(!CompareKind::Ge.apply(&nan, &1.0));
    }
}
