//! Column-at-a-time evaluation of ops over fixed-size list layouts.
//!
//! Null handling works on validity masks: a null at any list layer or leaf
//! of any operand makes the output null at that position, and null list rows
//! always have null child slots, so leaf kernels only ever see live data.

use featherpipe_core::batch::{blank_null_rows, Array, Column, ListArray};
use featherpipe_core::error::{ErrorKind, OpError};
use featherpipe_core::hash::{bloom_indices, hash_index};
use featherpipe_core::kernels::date::{date_diff_days, date_part};
use featherpipe_core::kernels::geo::haversine_km;
use featherpipe_core::kernels::logic::CompareKind;
use featherpipe_core::kernels::numeric::{aggregate_f64, aggregate_i64, is_missing, log_shift, AggKind, ScaleStats};
use featherpipe_core::kernels::text::{split_pad, RegexExtractor};
use featherpipe_core::kernels::vocab::VocabIndex;
use featherpipe_core::ops::{Op, Signature, StageDef};
use featherpipe_core::schema::DType;
use featherpipe_core::value::coerce_scalar;
use featherpipe_core::{FittedState, Value};

/// A value error at `row` while reading input `input`.
#[derive(Debug)]
pub(crate) struct Failure {
    pub input: usize,
    pub row: usize,
    pub error: OpError,
}

type LeafResult<T> = Result<T, (usize, OpError)>;

/// Per-stage assets compiled once: lookup tables, regexes, scaling stats.
#[derive(Debug, Clone, Default)]
pub(crate) struct Prepared {
    vocab: Option<VocabIndex>,
    regex: Option<RegexExtractor>,
    stats: Option<ScaleStats<f64>>,
    fill: Option<f64>,
}

impl Prepared {
    pub fn new(stage: &StageDef, state: Option<&FittedState>) -> Result<Self, String> {
        let mut p = Prepared::default();
        if let (Some(vp), Some(FittedState::Vocabulary { labels })) = (stage.op.vocab_params(), state) {
            p.vocab = Some(
                VocabIndex::new(labels, vp.num_oov_indices, vp.mask_token.as_deref()).map_err(|e| e.to_string())?,
            );
        }
        if let Op::RegexExtract(rp) = &stage.op {
            p.regex = Some(RegexExtractor::new(&rp.pattern, rp.group_index, &rp.default_value).map_err(|e| e.to_string())?);
        }
        match state {
            Some(FittedState::Moments { mean, std }) => {
                p.stats = Some(ScaleStats { mean: mean.clone(), std: std.clone() });
            }
            Some(FittedState::Impute { value }) => p.fill = Some(*value),
            _ => {}
        }
        Ok(p)
    }
}

fn mismatch(expected: DType, got: &Column) -> OpError {
    OpError::new(
        ErrorKind::DTypeMismatch,
        format!("expected a {expected} column, got {}", got.dtype()),
    )
}

macro_rules! leaf_accessor {
    ($name:ident, $variant:ident, $t:ty, $dtype:expr) => {
        fn $name(leaf: &Column) -> Result<&Array<$t>, OpError> {
            match leaf {
                Column::$variant(a) => Ok(a),
                other => Err(mismatch($dtype, other)),
            }
        }
    };
}

leaf_accessor!(utf8, Utf8, String, DType::String);
leaf_accessor!(f64s, Float64, f64, DType::Float64);
leaf_accessor!(bools, Bool, bool, DType::Bool);

fn map_array<T, U>(a: &Array<T>, mut f: impl FnMut(&T) -> Result<U, OpError>) -> LeafResult<Array<U>>
where
    T: Clone + Default,
    U: Clone + Default,
{
    let mut out = Array::with_capacity(a.len());
    for (i, v) in a.iter().enumerate() {
        match v {
            None => out.push_null(),
            Some(x) => out.push(Some(f(x).map_err(|e| (i, e))?)),
        }
    }
    Ok(out)
}

/// List layers, outermost first.
fn layers(col: &Column) -> Vec<(usize, &[bool])> {
    let mut out = Vec::new();
    let mut c = col;
    while let Column::List(l) = c {
        out.push((l.size(), l.validity()));
        c = l.child();
    }
    out
}

/// Wraps `leaf` in list layers (outermost first), re-establishing the
/// null-row invariant at every layer.
fn wrap(layers: Vec<(usize, Vec<bool>)>, leaf: Column) -> Column {
    let mut col = leaf;
    for (size, validity) in layers.into_iter().rev() {
        col = Column::List(blank_null_rows(ListArray::new(size, validity, col)));
    }
    col
}

/// Replaces the leaf array; errors are reported by row.
fn map_leaf(col: &Column, f: impl FnOnce(&Column) -> LeafResult<Column>) -> LeafResult<Column> {
    let per_row = col.leaves_per_row().max(1);
    let leaf = f(col.leaf()).map_err(|(i, e)| (i / per_row, e))?;
    Ok(col.with_leaf(leaf))
}

/// Expands each leaf slot into a fixed-size list of `size` values. Null
/// slots become null lists.
fn push_inner<T, U>(
    leaf: &Array<T>,
    size: usize,
    mut f: impl FnMut(&T, &mut Vec<U>) -> Result<(), OpError>,
    make: fn(Array<U>) -> Column,
) -> LeafResult<Column>
where
    T: Clone + Default,
    U: Clone + Default,
{
    let mut validity = Vec::with_capacity(leaf.len());
    let mut child = Array::with_capacity(leaf.len() * size);
    let mut buf = Vec::with_capacity(size);
    for (i, v) in leaf.iter().enumerate() {
        match v {
            None => {
                validity.push(false);
                for _ in 0..size {
                    child.push_null();
                }
            }
            Some(x) => {
                buf.clear();
                f(x, &mut buf).map_err(|e| (i, e))?;
                debug_assert_eq!(buf.len(), size);
                validity.push(true);
                for u in buf.drain(..) {
                    child.push(Some(u));
                }
            }
        }
    }
    Ok(Column::List(ListArray::new(size, validity, make(child))))
}

macro_rules! gather_typed {
    ($sources:expr, $picks:expr, $variant:ident) => {{
        let arrays: Vec<_> = $sources
            .iter()
            .map(|c| match c {
                Column::$variant(a) => a,
                _ => unreachable!("gather sources share a dtype"),
            })
            .collect();
        Column::$variant($picks.map(|(c, s)| arrays[c].get(s).cloned()).collect())
    }};
}

/// Builds a leaf by picking `(source, slot)` pairs from leaves of one dtype.
fn gather(sources: &[&Column], picks: impl Iterator<Item = (usize, usize)>) -> Column {
    match sources[0] {
        Column::Int64(_) => gather_typed!(sources, picks, Int64),
        Column::Float64(_) => gather_typed!(sources, picks, Float64),
        Column::Bool(_) => gather_typed!(sources, picks, Bool),
        Column::Utf8(_) => gather_typed!(sources, picks, Utf8),
        Column::List(_) => unreachable!("gather works on leaves"),
    }
}

/// Converts every leaf to `to`.
fn convert(col: &Column, to: DType) -> LeafResult<Column> {
    map_leaf(col, |leaf| {
        let mut vals = Vec::with_capacity(leaf.len());
        for i in 0..leaf.len() {
            vals.push(coerce_scalar(&leaf.value(i), to).map_err(|e| (i, e))?);
        }
        Ok(Column::from_values(to, &[], &vals).expect("coerced values match the target dtype"))
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    /// Same shape as the output.
    Full,
    /// Scalar column repeated over each row's positions.
    PerRow,
    /// A single constant.
    Const,
}

struct Operand<'a> {
    col: &'a Column,
    mode: Mode,
}

impl Operand<'_> {
    #[inline]
    fn slot(&self, k: usize, per_row: usize) -> usize {
        match self.mode {
            Mode::Full => k,
            Mode::PerRow => k / per_row,
            Mode::Const => 0,
        }
    }
}

/// Lock-step evaluation over operands of the output shape `dims` with scalar
/// broadcast.
fn broadcast<U: Clone + Default>(
    ops: &[Operand<'_>],
    dims: &[usize],
    rows: usize,
    mut f: impl FnMut(&[usize]) -> Result<U, OpError>,
    make: fn(Array<U>) -> Column,
) -> LeafResult<Column> {
    let per_row: usize = dims.iter().product();
    let leaves: Vec<&Column> = ops.iter().map(|o| o.col.leaf()).collect();
    let mut out = Array::with_capacity(rows * per_row);
    let mut slots = vec![0usize; ops.len()];
    for k in 0..rows * per_row {
        let mut live = true;
        for (j, o) in ops.iter().enumerate() {
            slots[j] = o.slot(k, per_row);
            live &= leaves[j].is_valid(slots[j]);
        }
        if live {
            out.push(Some(f(&slots).map_err(|e| (k / per_row, e))?));
        } else {
            out.push_null();
        }
    }
    let mut out_layers = Vec::with_capacity(dims.len());
    let mut count = rows;
    let mut per_row_items = 1;
    for (d, &size) in dims.iter().enumerate() {
        let mut validity = vec![true; count];
        for o in ops {
            match o.mode {
                Mode::Full => {
                    let (_, v) = layers(o.col)[d];
                    validity.iter_mut().zip(v).for_each(|(a, b)| *a &= *b);
                }
                Mode::PerRow => {
                    for (idx, a) in validity.iter_mut().enumerate() {
                        *a &= o.col.is_valid(idx / per_row_items);
                    }
                }
                Mode::Const => {}
            }
        }
        out_layers.push((size, validity));
        count *= size;
        per_row_items *= size;
    }
    Ok(wrap(out_layers, make(out)))
}

fn operands<'a>(cols: &'a [Column], consts: &'a [Column], dims: &[usize]) -> Vec<Operand<'a>> {
    cols.iter()
        .map(|c| Operand {
            col: c,
            mode: if c.dims().as_slice() == dims { Mode::Full } else { Mode::PerRow },
        })
        .chain(consts.iter().map(|c| Operand { col: c, mode: Mode::Const }))
        .collect()
}

fn constant_column(v: &Value, dtype: DType) -> Column {
    Column::from_values(dtype, &[], std::slice::from_ref(v)).expect("typed constant")
}

fn aggregate_lists(col: &Column, kind: AggKind, mask: Option<f64>) -> LeafResult<Column> {
    let ls = layers(col);
    let (size, inner_valid) = *ls.last().expect("aggregate input is a list");
    let groups = inner_valid.len();
    let leaf = col.leaf();
    let per_row: usize = ls[..ls.len() - 1].iter().map(|(s, _)| *s).product();
    let live = |q: usize| inner_valid[q] && (q * size..(q + 1) * size).all(|s| leaf.is_valid(s));
    let fail = |q: usize, e: OpError| (q / per_row, e);
    let out = match (leaf, kind) {
        (Column::Int64(a), AggKind::Mean) => {
            let mut out = Array::with_capacity(groups);
            for q in 0..groups {
                if !live(q) {
                    out.push_null();
                    continue;
                }
                let xs = a.values()[q * size..(q + 1) * size].iter().map(|x| *x as f64);
                out.push(Some(aggregate_f64(xs, kind, mask).map_err(|e| fail(q, e))?));
            }
            Column::Float64(out)
        }
        (Column::Int64(a), _) => {
            let mut out = Array::with_capacity(groups);
            for q in 0..groups {
                if !live(q) {
                    out.push_null();
                    continue;
                }
                let xs = a.values()[q * size..(q + 1) * size].iter().copied();
                out.push(Some(aggregate_i64(xs, kind, mask).map_err(|e| fail(q, e))?));
            }
            Column::Int64(out)
        }
        (Column::Float64(a), _) => {
            let mut out = Array::with_capacity(groups);
            for q in 0..groups {
                if !live(q) {
                    out.push_null();
                    continue;
                }
                let xs = a.values()[q * size..(q + 1) * size].iter().copied();
                out.push(Some(aggregate_f64(xs, kind, mask).map_err(|e| fail(q, e))?));
            }
            Column::Float64(out)
        }
        (other, _) => return Err((0, mismatch(DType::Float64, other))),
    };
    let outer: Vec<(usize, Vec<bool>)> = ls[..ls.len() - 1].iter().map(|(s, v)| (*s, v.to_vec())).collect();
    Ok(wrap(outer, out))
}

fn slice_lists(col: &Column, start: usize, len: usize) -> Column {
    let ls = layers(col);
    let (size, _) = *ls.last().expect("slice input is a list");
    let groups = ls.last().map(|(_, v)| v.len()).unwrap_or(0);
    let leaf = gather(&[col.leaf()], (0..groups).flat_map(|q| (0..len).map(move |i| (0, q * size + start + i))));
    let mut new_layers: Vec<(usize, Vec<bool>)> = ls.iter().map(|(s, v)| (*s, v.to_vec())).collect();
    new_layers.last_mut().expect("list").0 = len;
    wrap(new_layers, leaf)
}

fn assemble(cols: &[Column]) -> Column {
    let rows = cols[0].len();
    let k = cols.len();
    let m = cols[0].leaves_per_row();
    let leaves: Vec<&Column> = cols.iter().map(Column::leaf).collect();
    let leaf = gather(
        &leaves,
        (0..rows).flat_map(move |r| (0..k).flat_map(move |j| (0..m).map(move |i| (j, r * m + i)))),
    );
    let mut out_layers = vec![(k, vec![true; rows])];
    if let Column::List(_) = &cols[0] {
        let validity = (0..rows).flat_map(|r| cols.iter().map(move |c| c.is_valid(r))).collect();
        out_layers.push((m, validity));
    }
    wrap(out_layers, leaf)
}

fn disassemble(col: &Column, parts: usize) -> Vec<Column> {
    let ls = layers(col);
    let rows = col.len();
    let leaf = col.leaf();
    (0..parts)
        .map(|j| match ls.as_slice() {
            [(k, _)] => gather(&[leaf], (0..rows).map(|r| (0, r * k + j))),
            [(k, _), (n, inner)] => {
                let (k, n) = (*k, *n);
                let validity = (0..rows).map(|r| inner[r * k + j]).collect();
                let leaf = gather(&[leaf], (0..rows).flat_map(move |r| (0..n).map(move |i| (0, (r * k + j) * n + i))));
                wrap(vec![(n, validity)], leaf)
            }
            _ => unreachable!("disassemble input is a list of rank 1 or 2"),
        })
        .collect()
}

fn scale(col: &Column, stats: &ScaleStats<f64>) -> LeafResult<Column> {
    let positions = col.leaves_per_row().max(1);
    if positions != stats.len() {
        return Err((
            0,
            OpError::new(
                ErrorKind::ShapeMismatch,
                format!("expected {} positions, got {positions}", stats.len()),
            ),
        ));
    }
    map_leaf(col, |leaf| {
        let a = f64s(leaf).map_err(|e| (0, e))?;
        let mut out = Array::with_capacity(a.len());
        for (k, v) in a.iter().enumerate() {
            out.push(v.map(|x| stats.apply(k % positions, *x)));
        }
        Ok(Column::Float64(out))
    })
}

fn impute(col: &Column, fill: f64, sentinel: Option<f64>) -> LeafResult<Column> {
    let a = f64s(col.leaf()).map_err(|e| (0, e))?;
    let leaf: Array<f64> = a
        .iter()
        .map(|v| Some(v.copied().filter(|x| !is_missing(*x, sentinel)).unwrap_or(fill)))
        .collect();
    let all_valid: Vec<(usize, Vec<bool>)> = layers(col).iter().map(|(s, v)| (*s, vec![true; v.len()])).collect();
    Ok(wrap(all_valid, Column::Float64(leaf)))
}

fn compare(ops: &[Operand<'_>], dims: &[usize], rows: usize, kind: CompareKind) -> LeafResult<Column> {
    let (a, b) = (ops[0].col.leaf(), ops[1].col.leaf());
    match (a, b) {
        (Column::Int64(x), Column::Int64(y)) => broadcast(ops, dims, rows, |s| Ok(kind.apply(&x.values()[s[0]], &y.values()[s[1]])), Column::Bool),
        (Column::Float64(x), Column::Float64(y)) => broadcast(ops, dims, rows, |s| Ok(kind.apply(&x.values()[s[0]], &y.values()[s[1]])), Column::Bool),
        (Column::Bool(x), Column::Bool(y)) => broadcast(ops, dims, rows, |s| Ok(kind.apply(&x.values()[s[0]], &y.values()[s[1]])), Column::Bool),
        (Column::Utf8(x), Column::Utf8(y)) => broadcast(
            ops,
            dims,
            rows,
            |s| Ok(kind.apply(x.values()[s[0]].as_str(), y.values()[s[1]].as_str())),
            Column::Bool,
        ),
        (x, y) => Err((
            0,
            OpError::new(
                ErrorKind::DTypeMismatch,
                format!("cannot compare {} with {}", x.dtype(), y.dtype()),
            ),
        )),
    }
}

fn select(ops: &[Operand<'_>], dims: &[usize], rows: usize) -> LeafResult<Column> {
    let cond = bools(ops[0].col.leaf()).map_err(|e| (0, e))?;
    macro_rules! pick {
        ($variant:ident, $t:ident, $f:ident) => {
            broadcast(
                ops,
                dims,
                rows,
                |s| Ok(if cond.values()[s[0]] { $t.values()[s[1]].clone() } else { $f.values()[s[2]].clone() }),
                Column::$variant,
            )
        };
    }
    match (ops[1].col.leaf(), ops[2].col.leaf()) {
        (Column::Int64(t), Column::Int64(f)) => pick!(Int64, t, f),
        (Column::Float64(t), Column::Float64(f)) => pick!(Float64, t, f),
        (Column::Bool(t), Column::Bool(f)) => pick!(Bool, t, f),
        (Column::Utf8(t), Column::Utf8(f)) => pick!(Utf8, t, f),
        (t, f) => Err((
            0,
            OpError::new(
                ErrorKind::DTypeMismatch,
                format!("branches are {} and {}", t.dtype(), f.dtype()),
            ),
        )),
    }
}

/// Runs one stage over source columns (in stage input order), returning one
/// column per output.
pub(crate) fn evaluate(
    stage: &StageDef,
    sig: &Signature,
    prepared: &Prepared,
    sources: &[&Column],
    rows: usize,
) -> Result<Vec<Column>, Failure> {
    let mut cols = Vec::with_capacity(sources.len());
    for (i, (col, src)) in sources.iter().zip(&sig.sources).enumerate() {
        let mut c = (*col).clone();
        let mut dtype = src.dtype;
        for target in [stage.input_dtype, Some(sig.operand_dtypes[i])].into_iter().flatten() {
            if target != dtype {
                c = convert(&c, target).map_err(|(row, error)| Failure { input: i, row, error })?;
                dtype = target;
            }
        }
        cols.push(c);
    }
    let fail = |(row, error): (usize, OpError)| Failure { input: 0, row, error };
    let one = |r: LeafResult<Column>| r.map(|c| vec![c]).map_err(fail);
    let out_dims = sig.outputs.first().and_then(|f| f.shape.fixed_dims()).unwrap_or_default();

    match &stage.op {
        Op::HashIndex(p) => one(map_leaf(&cols[0], |leaf| {
            let a = utf8(leaf).map_err(|e| (0, e))?;
            map_array(a, |s| Ok(hash_index(s, p.num_bins, p.mask_token.as_deref()))).map(Column::Int64)
        })),
        Op::BloomEncode(p) => one(map_leaf(&cols[0], |leaf| {
            let a = utf8(leaf).map_err(|e| (0, e))?;
            push_inner(
                a,
                p.num_hashes as usize,
                |s, buf| {
                    buf.extend(bloom_indices(s, p.num_bins, p.num_hashes));
                    Ok(())
                },
                Column::Int64,
            )
        })),
        Op::LogTransform(p) => one(map_leaf(&cols[0], |leaf| {
            let a = f64s(leaf).map_err(|e| (0, e))?;
            map_array(a, |x| log_shift(*x, p.alpha)).map(Column::Float64)
        })),
        Op::Arithmetic(p) => {
            let consts: Vec<Column> = p.constant.iter().map(|c| constant_column(&Value::Float(*c), DType::Float64)).collect();
            let ops = operands(&cols, &consts, &out_dims);
            let (a, b) = (f64s(ops[0].col.leaf()), f64s(ops[1].col.leaf()));
            let (a, b) = (a.map_err(|e| fail((0, e)))?, b.map_err(|e| fail((0, e)))?);
            one(broadcast(&ops, &out_dims, rows, |s| p.kind.apply(a.values()[s[0]], b.values()[s[1]]), Column::Float64))
        }
        Op::StringToList(p) => one(map_leaf(&cols[0], |leaf| {
            let a = utf8(leaf).map_err(|e| (0, e))?;
            push_inner(
                a,
                p.list_length,
                |s, buf| {
                    buf.extend(split_pad(s, &p.separator, p.list_length, &p.default_value));
                    Ok(())
                },
                Column::Utf8,
            )
        })),
        Op::RegexExtract(_) => {
            let re = prepared.regex.as_ref().expect("regex compiled at prepare time");
            one(map_leaf(&cols[0], |leaf| {
                let a = utf8(leaf).map_err(|e| (0, e))?;
                map_array(a, |s| Ok(re.extract(s).to_string())).map(Column::Utf8)
            }))
        }
        Op::StringCase(p) => one(map_leaf(&cols[0], |leaf| {
            let a = utf8(leaf).map_err(|e| (0, e))?;
            map_array(a, |s| Ok(p.kind.apply(s))).map(Column::Utf8)
        })),
        Op::StringConcat(p) => {
            let ops = operands(&cols, &[], &out_dims);
            let arrays = ops.iter().map(|o| utf8(o.col.leaf())).collect::<Result<Vec<_>, _>>().map_err(|e| fail((0, e)))?;
            one(broadcast(
                &ops,
                &out_dims,
                rows,
                |s| {
                    let mut parts: Vec<&str> = arrays.iter().zip(s).map(|(a, &i)| a.values()[i].as_str()).collect();
                    parts.extend(p.constants.iter().map(String::as_str));
                    Ok(parts.join(&p.separator))
                },
                Column::Utf8,
            ))
        }
        Op::DateDecompose(p) => one(map_leaf(&cols[0], |leaf| {
            let a = utf8(leaf).map_err(|e| (0, e))?;
            map_array(a, |s| date_part(s, p.part)).map(Column::Int64)
        })),
        Op::DateDiffDays => {
            let ops = operands(&cols, &[], &out_dims);
            let (a, b) = (utf8(ops[0].col.leaf()), utf8(ops[1].col.leaf()));
            let (a, b) = (a.map_err(|e| fail((0, e)))?, b.map_err(|e| fail((0, e)))?);
            one(broadcast(&ops, &out_dims, rows, |s| date_diff_days(&a.values()[s[0]], &b.values()[s[1]]), Column::Int64))
        }
        Op::HaversineKm => {
            let ops = operands(&cols, &[], &out_dims);
            let xs = ops.iter().map(|o| f64s(o.col.leaf())).collect::<Result<Vec<_>, _>>().map_err(|e| fail((0, e)))?;
            one(broadcast(
                &ops,
                &out_dims,
                rows,
                |s| haversine_km(xs[0].values()[s[0]], xs[1].values()[s[1]], xs[2].values()[s[2]], xs[3].values()[s[3]]),
                Column::Float64,
            ))
        }
        Op::Logical(p) => {
            let ops = operands(&cols, &[], &out_dims);
            let xs = ops.iter().map(|o| bools(o.col.leaf())).collect::<Result<Vec<_>, _>>().map_err(|e| fail((0, e)))?;
            one(broadcast(
                &ops,
                &out_dims,
                rows,
                |s| {
                    let b = s.get(1).is_some_and(|&i| xs[1].values()[i]);
                    Ok(p.kind.apply(xs[0].values()[s[0]], b))
                },
                Column::Bool,
            ))
        }
        Op::Compare(p) => {
            let consts: Vec<Column> = sig.constant.iter().map(|c| constant_column(c, sig.operand_dtypes[0])).collect();
            let ops = operands(&cols, &consts, &out_dims);
            one(compare(&ops, &out_dims, rows, p.kind))
        }
        Op::ConditionalSelect(_) => {
            let dtype = sig.outputs[0].dtype;
            let t = sig.if_true.as_ref().map(|c| constant_column(c, dtype));
            let f = sig.if_false.as_ref().map(|c| constant_column(c, dtype));
            let mut rest = cols[1..].iter();
            let mut ops = vec![Operand {
                col: &cols[0],
                mode: if cols[0].dims() == out_dims { Mode::Full } else { Mode::PerRow },
            }];
            for branch in [&t, &f] {
                ops.push(match branch {
                    Some(c) => Operand { col: c, mode: Mode::Const },
                    None => {
                        let c = rest.next().expect("arity checked");
                        Operand { col: c, mode: if c.dims() == out_dims { Mode::Full } else { Mode::PerRow } }
                    }
                });
            }
            one(select(&ops, &out_dims, rows))
        }
        Op::ArrayAssemble => Ok(vec![assemble(&cols)]),
        Op::ArrayDisassemble => Ok(disassemble(&cols[0], sig.outputs.len())),
        Op::ArraySlice(p) => Ok(vec![slice_lists(&cols[0], p.start, p.length)]),
        Op::ListAggregate(p) => one(aggregate_lists(&cols[0], p.kind, p.mask_value)),
        Op::Cast(_) => Ok(vec![cols.swap_remove(0)]),
        Op::StringIndex(_) | Op::SharedStringIndex(_) => {
            let vocab = prepared.vocab.as_ref().expect("vocabulary prepared for fitted stage");
            cols.iter()
                .enumerate()
                .map(|(i, c)| {
                    map_leaf(c, |leaf| {
                        let a = utf8(leaf).map_err(|e| (0, e))?;
                        map_array(a, |s| Ok(vocab.index(s))).map(Column::Int64)
                    })
                    .map_err(|(row, error)| Failure { input: i, row, error })
                })
                .collect()
        }
        Op::OneHotEncode(p) => {
            let vocab = prepared.vocab.as_ref().expect("vocabulary prepared for fitted stage");
            let width = vocab.one_hot_width(p.drop_unseen);
            one(map_leaf(&cols[0], |leaf| {
                let a = utf8(leaf).map_err(|e| (0, e))?;
                push_inner(
                    a,
                    width,
                    |s, buf| {
                        buf.resize(width, 0.0);
                        if let Some(pos) = vocab.one_hot_position(s, p.drop_unseen) {
                            buf[pos] = 1.0;
                        }
                        Ok(())
                    },
                    Column::Float64,
                )
            }))
        }
        Op::StandardScale => one(scale(&cols[0], prepared.stats.as_ref().expect("moments prepared"))),
        Op::Impute(p) => one(impute(&cols[0], prepared.fill.expect("impute value prepared"), p.sentinel)),
    }
}

/// Operand columns as estimators see them: after both conversion steps.
pub(crate) fn operand_columns(stage: &StageDef, sig: &Signature, sources: &[&Column]) -> Result<Vec<Column>, Failure> {
    sources
        .iter()
        .zip(&sig.sources)
        .enumerate()
        .map(|(i, (col, src))| {
            let mut c = (*col).clone();
            let mut dtype = src.dtype;
            for target in [stage.input_dtype, Some(sig.operand_dtypes[i])].into_iter().flatten() {
                if target != dtype {
                    c = convert(&c, target).map_err(|(row, error)| Failure { input: i, row, error })?;
                    dtype = target;
                }
            }
            Ok(c)
        })
        .collect()
}
