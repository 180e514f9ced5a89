//! Recursive evaluation of one stage on row values.

use featherpipe_core::error::{ErrorKind, OpError};
use featherpipe_core::hash::{bloom_indices, hash_index};
use featherpipe_core::kernels::date::{date_diff_days, date_part};
use featherpipe_core::kernels::geo::haversine_km;
use featherpipe_core::kernels::logic::compare_values;
use featherpipe_core::kernels::numeric::{aggregate_f64, aggregate_i64, is_missing, log_shift, AggKind};
use featherpipe_core::kernels::text::split_pad;
use featherpipe_core::schema::{DType, ShapeSpec};
use featherpipe_core::Value;

use crate::plan::Kernel;

fn leaf_error(expected: &str, got: &Value) -> OpError {
    OpError::new(ErrorKind::DTypeMismatch, format!("expected {expected}, got {got}"))
}

fn f64_of(v: &Value) -> Result<f64, OpError> {
    match v {
        Value::Float(x) => Ok(*x),
        other => Err(leaf_error("float64", other)),
    }
}

fn str_of(v: &Value) -> Result<&str, OpError> {
    v.as_str().ok_or_else(|| leaf_error("string", v))
}

fn bool_of(v: &Value) -> Result<bool, OpError> {
    v.as_bool().ok_or_else(|| leaf_error("bool", v))
}

/// Applies `f` to every non-null leaf; nulls stay null.
fn map_leaves(v: &Value, f: &mut dyn FnMut(&Value) -> Result<Value, OpError>) -> Result<Value, OpError> {
    match v {
        Value::Null => Ok(Value::Null),
        Value::List(items) => items.iter().map(|x| map_leaves(x, f)).collect::<Result<_, _>>().map(Value::List),
        leaf => f(leaf),
    }
}

/// Lock-step traversal of operands with scalar broadcast. Any null operand
/// yields null at that position.
fn zip_map(args: &[&Value], f: &mut dyn FnMut(&[&Value]) -> Result<Value, OpError>) -> Result<Value, OpError> {
    if args.iter().any(|a| a.is_null()) {
        return Ok(Value::Null);
    }
    let Some(n) = args.iter().find_map(|a| a.as_list().map(<[Value]>::len)) else {
        return f(args);
    };
    if let Some(bad) = args.iter().filter_map(|a| a.as_list()).find(|l| l.len() != n) {
        return Err(OpError::new(
            ErrorKind::ShapeMismatch,
            format!("list lengths {n} and {} differ", bad.len()),
        ));
    }
    let mut out = Vec::with_capacity(n);
    let mut sub = Vec::with_capacity(args.len());
    for i in 0..n {
        sub.clear();
        sub.extend(args.iter().map(|a| match a {
            Value::List(items) => &items[i],
            scalar => *scalar,
        }));
        out.push(zip_map(&sub, f)?);
    }
    Ok(Value::List(out))
}

/// Applies `f` to each innermost list of a value of rank `rank`.
fn map_inner_lists(
    v: &Value,
    rank: usize,
    f: &mut dyn FnMut(&[Value]) -> Result<Value, OpError>,
) -> Result<Value, OpError> {
    match v {
        Value::Null => Ok(Value::Null),
        Value::List(items) if rank <= 1 => f(items),
        Value::List(items) => items
            .iter()
            .map(|x| map_inner_lists(x, rank - 1, f))
            .collect::<Result<_, _>>()
            .map(Value::List),
        other => Err(leaf_error("a list", other)),
    }
}

/// Replaces nulls at any level with `fill`, materializing lists of `shape`.
fn fill_nulls(v: &Value, dims: &[usize], fill: f64, sentinel: Option<f64>) -> Result<Value, OpError> {
    match (v, dims.split_first()) {
        (Value::Null, None) => Ok(Value::Float(fill)),
        (Value::Null, Some((n, rest))) => {
            let item = fill_nulls(&Value::Null, rest, fill, sentinel)?;
            Ok(Value::List(vec![item; *n]))
        }
        (Value::List(items), Some((_, rest))) => items
            .iter()
            .map(|x| fill_nulls(x, rest, fill, sentinel))
            .collect::<Result<_, _>>()
            .map(Value::List),
        (leaf, _) => {
            let x = f64_of(leaf)?;
            Ok(Value::Float(if is_missing(x, sentinel) { fill } else { x }))
        }
    }
}

fn aggregate(items: &[Value], kind: AggKind, mask: Option<f64>, dtype: DType) -> Result<Value, OpError> {
    if items.iter().any(Value::is_null) {
        return Ok(Value::Null);
    }
    match (dtype, kind) {
        (DType::Int64, AggKind::Mean) => {
            let xs = items.iter().map(|v| v.as_i64().map(|i| i as f64));
            let xs: Option<Vec<f64>> = xs.collect();
            let xs = xs.ok_or_else(|| leaf_error("int64", &items[0]))?;
            aggregate_f64(xs.into_iter().filter(|x| mask != Some(*x)), kind, None).map(Value::Float)
        }
        (DType::Int64, _) => {
            let xs: Option<Vec<i64>> = items.iter().map(Value::as_i64).collect();
            let xs = xs.ok_or_else(|| leaf_error("int64", &items[0]))?;
            aggregate_i64(xs, kind, mask).map(Value::Int)
        }
        _ => {
            let xs = items.iter().map(f64_of).collect::<Result<Vec<_>, _>>()?;
            aggregate_f64(xs, kind, mask).map(Value::Float)
        }
    }
}

/// Evaluates a kernel on operands already converted to the signature's
/// operand dtypes. Returns one value per output.
pub(crate) fn eval(kernel: &Kernel, args: &[&Value], shape: &ShapeSpec) -> Result<Vec<Value>, OpError> {
    let one = |v: Value| Ok(vec![v]);
    match kernel {
        Kernel::Identity => one(args[0].clone()),
        Kernel::Hash { bins, mask } => one(map_leaves(args[0], &mut |x| {
            Ok(Value::Int(hash_index(str_of(x)?, *bins, mask.as_deref())))
        })?),
        Kernel::Bloom { bins, hashes } => one(map_leaves(args[0], &mut |x| {
            Ok(Value::List(bloom_indices(str_of(x)?, *bins, *hashes).map(Value::Int).collect()))
        })?),
        Kernel::Log { alpha } => one(map_leaves(args[0], &mut |x| {
            log_shift(f64_of(x)?, *alpha).map(Value::Float)
        })?),
        Kernel::Arith { kind, constant } => {
            let c = constant.map(Value::Float);
            let mut operands: Vec<&Value> = args.to_vec();
            if let Some(c) = &c {
                operands.push(c);
            }
            one(zip_map(&operands, &mut |xs| {
                kind.apply(f64_of(xs[0])?, f64_of(xs[1])?).map(Value::Float)
            })?)
        }
        Kernel::Split { separator, len, default } => one(map_leaves(args[0], &mut |x| {
            Ok(Value::List(
                split_pad(str_of(x)?, separator, *len, default).into_iter().map(Value::Str).collect(),
            ))
        })?),
        Kernel::Regex(re) => one(map_leaves(args[0], &mut |x| Ok(Value::str(re.extract(str_of(x)?))))?),
        Kernel::Case(kind) => one(map_leaves(args[0], &mut |x| Ok(Value::Str(kind.apply(str_of(x)?))))?),
        Kernel::Concat { separator, constants } => one(zip_map(args, &mut |xs| {
            let mut parts = Vec::with_capacity(xs.len() + constants.len());
            for x in xs {
                parts.push(str_of(x)?);
            }
            parts.extend(constants.iter().map(String::as_str));
            Ok(Value::Str(parts.join(separator)))
        })?),
        Kernel::DatePart(part) => one(map_leaves(args[0], &mut |x| date_part(str_of(x)?, *part).map(Value::Int))?),
        Kernel::DateDiff => one(zip_map(args, &mut |xs| {
            date_diff_days(str_of(xs[0])?, str_of(xs[1])?).map(Value::Int)
        })?),
        Kernel::Haversine => one(zip_map(args, &mut |xs| {
            haversine_km(f64_of(xs[0])?, f64_of(xs[1])?, f64_of(xs[2])?, f64_of(xs[3])?).map(Value::Float)
        })?),
        Kernel::Logical(kind) => one(zip_map(args, &mut |xs| {
            let a = bool_of(xs[0])?;
            let b = if xs.len() > 1 { bool_of(xs[1])? } else { false };
            Ok(Value::Bool(kind.apply(a, b)))
        })?),
        Kernel::Compare { kind, constant } => {
            let mut operands: Vec<&Value> = args.to_vec();
            if let Some(c) = constant {
                operands.push(c);
            }
            one(zip_map(&operands, &mut |xs| compare_values(*kind, xs[0], xs[1]).map(Value::Bool))?)
        }
        Kernel::Select { if_true, if_false } => {
            let mut rest = args[1..].iter();
            let t = match if_true {
                Some(c) => c,
                None => *rest.next().expect("arity checked"),
            };
            let f = match if_false {
                Some(c) => c,
                None => *rest.next().expect("arity checked"),
            };
            one(zip_map(&[args[0], t, f], &mut |xs| {
                Ok(if bool_of(xs[0])? { xs[1].clone() } else { xs[2].clone() })
            })?)
        }
        Kernel::Assemble => one(Value::List(args.iter().map(|v| (*v).clone()).collect())),
        Kernel::Disassemble { parts } => match args[0] {
            Value::Null => Ok(vec![Value::Null; *parts]),
            Value::List(items) if items.len() == *parts => Ok(items.clone()),
            other => Err(OpError::new(
                ErrorKind::ShapeMismatch,
                format!("cannot split {other} into {parts} parts"),
            )),
        },
        Kernel::Slice { start, len } => one(map_inner_lists(args[0], shape.rank(), &mut |items| {
            items
                .get(*start..*start + *len)
                .map(|s| Value::List(s.to_vec()))
                .ok_or_else(|| {
                    OpError::new(
                        ErrorKind::IndexOutOfRange,
                        format!("slice [{start}, {}) of a list of length {}", start + len, items.len()),
                    )
                })
        })?),
        Kernel::Aggregate { kind, mask, dtype } => one(map_inner_lists(args[0], shape.rank(), &mut |items| {
            aggregate(items, *kind, *mask, *dtype)
        })?),
        Kernel::Index(vocab) => Ok(args
            .iter()
            .map(|a| map_leaves(a, &mut |x| Ok(Value::Int(vocab.index(str_of(x)?)))))
            .collect::<Result<_, _>>()?),
        Kernel::OneHot { vocab, drop_unseen } => one(map_leaves(args[0], &mut |x| {
            Ok(Value::List(
                vocab.one_hot(str_of(x)?, *drop_unseen).into_iter().map(Value::Float).collect(),
            ))
        })?),
        Kernel::Scale(stats) => one(match args[0] {
            Value::List(items) => {
                if items.len() != stats.len() {
                    return Err(OpError::new(
                        ErrorKind::ShapeMismatch,
                        format!("expected {} positions, got {}", stats.len(), items.len()),
                    ));
                }
                Value::List(
                    items
                        .iter()
                        .enumerate()
                        .map(|(i, x)| match x {
                            Value::Null => Ok(Value::Null),
                            x => Ok(Value::Float(stats.apply(i, f64_of(x)?))),
                        })
                        .collect::<Result<_, OpError>>()?,
                )
            }
            Value::Null => Value::Null,
            x => Value::Float(stats.apply(0, f64_of(x)?)),
        }),
        Kernel::Impute { value, sentinel } => {
            let dims = shape.fixed_dims().unwrap_or_default();
            one(fill_nulls(args[0], &dims, *value, *sentinel)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use featherpipe_core::kernels::numeric::ArithKind;

    fn floats(xs: &[f64]) -> Value {
        Value::list(xs.iter().copied())
    }

    #[test]
    fn broadcast_and_nulls() {
        let k = Kernel::Arith { kind: ArithKind::Mul, constant: Some(2.0) };
        let out = eval(&k, &[&floats(&[1.0, 2.0, 3.0])], &ShapeSpec::list(3)).unwrap();
        assert_eq!(out[0], floats(&[2.0, 4.0, 6.0]));
        let with_null = Value::List(vec![Value::Float(1.0), Value::Null]);
        let out = eval(&k, &[&with_null], &ShapeSpec::list(2)).unwrap();
        assert_eq!(out[0], Value::List(vec![Value::Float(2.0), Value::Null]));
        let add = Kernel::Arith { kind: ArithKind::Add, constant: None };
        let err = eval(&add, &[&floats(&[1.0, 2.0]), &floats(&[1.0, 2.0, 3.0])], &ShapeSpec::list(2)).unwrap_err();
        assert_eq!(err.kind, ErrorKind::ShapeMismatch);
    }

    #[test]
    fn select_is_leafwise() {
        let k = Kernel::Select { if_true: None, if_false: None };
        let cond = Value::list([true, false]);
        let out = eval(&k, &[&cond, &Value::list([1i64, 1]), &Value::list([2i64, 2])], &ShapeSpec::list(2)).unwrap();
        assert_eq!(out[0], Value::list([1i64, 2]));
        let out = eval(&k, &[&Value::Null, &Value::Int(1), &Value::Int(2)], &ShapeSpec::scalar()).unwrap();
        assert_eq!(out[0], Value::Null);
    }

    #[test]
    fn sequence_level_ops() {
        let agg = Kernel::Aggregate { kind: AggKind::Sum, mask: Some(0.0), dtype: DType::Int64 };
        let out = eval(&agg, &[&Value::list([2i64, 4, 0])], &ShapeSpec::list(3)).unwrap();
        assert_eq!(out[0], Value::Int(6));
        let nested = Value::List(vec![Value::list([1i64, 2]), Value::Null]);
        let out = eval(&agg, &[&nested], &ShapeSpec::nested(2, 2)).unwrap();
        assert_eq!(out[0], Value::List(vec![Value::Int(3), Value::Null]));
        let slice = Kernel::Slice { start: 1, len: 2 };
        let out = eval(&slice, &[&Value::list([1i64, 2, 3, 4])], &ShapeSpec::list(4)).unwrap();
        assert_eq!(out[0], Value::list([2i64, 3]));
    }

    #[test]
    fn impute_fills_whole_null_lists() {
        let k = Kernel::Impute { value: 2.0, sentinel: Some(-1.0) };
        let out = eval(&k, &[&Value::Null], &ShapeSpec::list(2)).unwrap();
        assert_eq!(out[0], floats(&[2.0, 2.0]));
        let out = eval(&k, &[&Value::List(vec![Value::Float(-1.0), Value::Float(5.0)])], &ShapeSpec::list(2)).unwrap();
        assert_eq!(out[0], floats(&[2.0, 5.0]));
    }
}
