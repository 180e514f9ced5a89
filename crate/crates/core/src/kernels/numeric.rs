use serde::{Deserialize, Serialize};

use crate::error::{ErrorKind, OpError};
use crate::num::Real;

/// Standard deviations below this scale to 0.0 instead of dividing.
pub const STD_EPSILON: f64 = 1e-12;

/// Natural log of `x + alpha`.
pub fn log_shift<T: Real>(x: T, alpha: T) -> Result<T, OpError> {
    let shifted = x + alpha;
    if shifted > T::zero() {
        Ok(shifted.ln())
    } else {
        Err(OpError::new(
            ErrorKind::Domain,
            format!("log undefined for x + alpha = {x} + {alpha} <= 0"),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

impl ArithKind {
    pub fn apply<T: Real>(self, a: T, b: T) -> Result<T, OpError> {
        Ok(match self {
            ArithKind::Add => a + b,
            ArithKind::Sub => a - b,
            ArithKind::Mul => a * b,
            ArithKind::Div => {
                if b == T::zero() {
                    return Err(OpError::new(ErrorKind::DivideByZero, format!("{a} / 0")));
                }
                a / b
            }
            ArithKind::Pow => a.powf(b),
            ArithKind::Min => a.min(b),
            ArithKind::Max => a.max(b),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AggKind {
    Sum,
    Mean,
    Min,
    Max,
}

fn empty_aggregate() -> OpError {
    OpError::new(
        ErrorKind::EmptyAggregate,
        "nothing left to aggregate after masking",
    )
}

/// Aggregates floats left to right, skipping elements equal to `mask`.
pub fn aggregate_f64(
    values: impl IntoIterator<Item = f64>,
    kind: AggKind,
    mask: Option<f64>,
) -> Result<f64, OpError> {
    let mut n = 0usize;
    let mut acc = 0.0f64;
    for x in values {
        if mask == Some(x) {
            continue;
        }
        acc = if n == 0 {
            x
        } else {
            match kind {
                AggKind::Sum | AggKind::Mean => acc + x,
                AggKind::Min => acc.min(x),
                AggKind::Max => acc.max(x),
            }
        };
        n += 1;
    }
    if n == 0 {
        return Err(empty_aggregate());
    }
    Ok(if kind == AggKind::Mean {
        acc / n as f64
    } else {
        acc
    })
}

/// Integer sum/min/max (sums wrap on overflow). `Mean` goes through
/// [`aggregate_f64`].
pub fn aggregate_i64(
    values: impl IntoIterator<Item = i64>,
    kind: AggKind,
    mask: Option<f64>,
) -> Result<i64, OpError> {
    debug_assert!(kind != AggKind::Mean);
    let mut acc: Option<i64> = None;
    for x in values {
        if mask == Some(x as f64) {
            continue;
        }
        acc = Some(match acc {
            None => x,
            Some(a) => match kind {
                AggKind::Sum | AggKind::Mean => a.wrapping_add(x),
                AggKind::Min => a.min(x),
                AggKind::Max => a.max(x),
            },
        });
    }
    acc.ok_or_else(empty_aggregate)
}

#[inline]
pub fn standard_scale<T: Real>(x: T, mean: T, std: T) -> T {
    if std < T::lit(STD_EPSILON) {
        T::zero()
    } else {
        (x - mean) / std
    }
}

/// Per-position scaling statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleStats<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Real> ScaleStats<T> {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn apply(&self, pos: usize, x: T) -> T {
        standard_scale(x, self.mean[pos], self.std[pos])
    }

    pub fn invert(&self, pos: usize, z: T) -> T {
        z * self.std[pos] + self.mean[pos]
    }
}

/// Whether `x` counts as missing for imputation.
#[inline]
pub fn is_missing(x: f64, sentinel: Option<f64>) -> bool {
    match sentinel {
        Some(s) => x == s || (s.is_nan() && x.is_nan()),
        None => false,
    }
}
