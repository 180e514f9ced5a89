//! Columnar storage: typed leaf arrays wrapped in fixed-size list layers.
//!
//! A column of shape `list[N][L]` is stored as `List(N) -> List(L) -> leaf`,
//! where the leaf array holds `rows * N * L` slots. A null list still owns its
//! slots; they are always null, so leaf-level kernels never see them as data.

use std::ops::Range;

use crate::error::SchemaError;
use crate::schema::{DType, FieldSpec, Schema, ShapeSpec};
use crate::value::Value;

/// Nullable primitive array; `validity[i] == false` marks a null slot whose
/// value is `T::default()`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Array<T> {
    values: Vec<T>,
    validity: Vec<bool>,
}

impl<T: Clone + Default> Array<T> {
    pub fn with_capacity(n: usize) -> Self {
        Array {
            values: Vec::with_capacity(n),
            validity: Vec::with_capacity(n),
        }
    }

    pub fn nulls(n: usize) -> Self {
        Array {
            values: vec![T::default(); n],
            validity: vec![false; n],
        }
    }

    pub fn from_values(values: Vec<T>) -> Self {
        let validity = vec![true; values.len()];
        Array { values, validity }
    }

    pub fn push(&mut self, value: Option<T>) {
        match value {
            Some(v) => {
                self.values.push(v);
                self.validity.push(true);
            }
            None => self.push_null(),
        }
    }

    pub fn push_null(&mut self) {
        self.values.push(T::default());
        self.validity.push(false);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&T> {
        if self.validity[i] {
            Some(&self.values[i])
        } else {
            None
        }
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.validity[i]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn validity(&self) -> &[bool] {
        &self.validity
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Option<&T>> + '_ {
        self.values
            .iter()
            .zip(&self.validity)
            .map(|(v, ok)| ok.then_some(v))
    }

    pub fn slice(&self, range: Range<usize>) -> Self {
        Array {
            values: self.values[range.clone()].to_vec(),
            validity: self.validity[range].to_vec(),
        }
    }

    pub fn extend(&mut self, other: &Array<T>) {
        self.values.extend_from_slice(&other.values);
        self.validity.extend_from_slice(&other.validity);
    }
}

impl<T: Clone + Default> FromIterator<Option<T>> for Array<T> {
    fn from_iter<I: IntoIterator<Item = Option<T>>>(iter: I) -> Self {
        let iter = iter.into_iter();
        let mut out = Array::with_capacity(iter.size_hint().0);
        for v in iter {
            out.push(v);
        }
        out
    }
}

/// Fixed-size list layer: every row owns exactly `size` child slots.
#[derive(Debug, Clone, PartialEq)]
pub struct ListArray {
    size: usize,
    validity: Vec<bool>,
    child: Box<Column>,
}

impl ListArray {
    pub fn new(size: usize, validity: Vec<bool>, child: Column) -> Self {
        assert_eq!(
            child.len(),
            validity.len() * size,
            "list child length must be rows * size"
        );
        ListArray {
            size,
            validity,
            child: Box::new(child),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn validity(&self) -> &[bool] {
        &self.validity
    }

    pub fn child(&self) -> &Column {
        &self.child
    }

    pub fn len(&self) -> usize {
        self.validity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.validity.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Int64(Array<i64>),
    Float64(Array<f64>),
    Bool(Array<bool>),
    Utf8(Array<String>),
    List(ListArray),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Int64(a) => a.len(),
            Column::Float64(a) => a.len(),
            Column::Bool(a) => a.len(),
            Column::Utf8(a) => a.len(),
            Column::List(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dtype of the leaf array.
    pub fn dtype(&self) -> DType {
        match self {
            Column::Int64(_) => DType::Int64,
            Column::Float64(_) => DType::Float64,
            Column::Bool(_) => DType::Bool,
            Column::Utf8(_) => DType::String,
            Column::List(l) => l.child.dtype(),
        }
    }

    /// List sizes, outermost first.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = Vec::new();
        let mut col = self;
        while let Column::List(l) = col {
            dims.push(l.size);
            col = &l.child;
        }
        dims
    }

    pub fn shape(&self) -> ShapeSpec {
        let dims = self.dims();
        match dims.as_slice() {
            [] => ShapeSpec::scalar(),
            [n] => ShapeSpec::list(*n),
            [n, l] => ShapeSpec::nested(*n, *l),
            _ => unreachable!("columns never nest deeper than two lists"),
        }
    }

    /// The innermost primitive array.
    pub fn leaf(&self) -> &Column {
        match self {
            Column::List(l) => l.child.leaf(),
            prim => prim,
        }
    }

    /// Leaf slots owned by each row.
    pub fn leaves_per_row(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_valid(&self, i: usize) -> bool {
        match self {
            Column::Int64(a) => a.is_valid(i),
            Column::Float64(a) => a.is_valid(i),
            Column::Bool(a) => a.is_valid(i),
            Column::Utf8(a) => a.is_valid(i),
            Column::List(l) => l.validity[i],
        }
    }

    /// Row-level validity for every row.
    pub fn validity(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.is_valid(i)).collect()
    }

    pub fn value(&self, i: usize) -> Value {
        match self {
            Column::Int64(a) => a.get(i).map_or(Value::Null, |v| Value::Int(*v)),
            Column::Float64(a) => a.get(i).map_or(Value::Null, |v| Value::Float(*v)),
            Column::Bool(a) => a.get(i).map_or(Value::Null, |v| Value::Bool(*v)),
            Column::Utf8(a) => a.get(i).map_or(Value::Null, |v| Value::Str(v.clone())),
            Column::List(l) => {
                if !l.validity[i] {
                    return Value::Null;
                }
                Value::List((i * l.size..(i + 1) * l.size).map(|j| l.child.value(j)).collect())
            }
        }
    }

    pub fn values(&self) -> Vec<Value> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    /// An all-null column of the given dtype and fixed dims.
    pub fn nulls(dtype: DType, dims: &[usize], rows: usize) -> Column {
        match dims.split_first() {
            None => match dtype {
                DType::Int64 => Column::Int64(Array::nulls(rows)),
                DType::Float64 => Column::Float64(Array::nulls(rows)),
                DType::Bool => Column::Bool(Array::nulls(rows)),
                DType::String => Column::Utf8(Array::nulls(rows)),
            },
            Some((size, rest)) => Column::List(ListArray::new(
                *size,
                vec![false; rows],
                Column::nulls(dtype, rest, rows * size),
            )),
        }
    }

    /// Builds a column from row values that conform to `dtype`/`dims`.
    pub fn from_values(dtype: DType, dims: &[usize], values: &[Value]) -> Result<Column, String> {
        match dims.split_first() {
            None => build_leaf(dtype, values),
            Some((&size, rest)) => {
                let mut validity = Vec::with_capacity(values.len());
                let mut children = Vec::with_capacity(values.len() * size);
                for v in values {
                    match v {
                        Value::Null => {
                            validity.push(false);
                            children.extend(std::iter::repeat(Value::Null).take(size));
                        }
                        Value::List(items) if items.len() == size => {
                            validity.push(true);
                            children.extend(items.iter().cloned());
                        }
                        Value::List(items) => {
                            return Err(format!(
                                "expected a list of length {size}, got {}",
                                items.len()
                            ))
                        }
                        other => return Err(format!("expected a list, got {other}")),
                    }
                }
                let child = Column::from_values(dtype, rest, &children)?;
                let list = ListArray::new(size, validity, child);
                Ok(Column::List(blank_null_rows(list)))
            }
        }
    }

    /// Replaces the leaf array, keeping every list layer.
    pub fn with_leaf(&self, leaf: Column) -> Column {
        match self {
            Column::List(l) => Column::List(ListArray::new(
                l.size,
                l.validity.clone(),
                l.child.with_leaf(leaf),
            )),
            _ => leaf,
        }
    }

    pub fn slice(&self, range: Range<usize>) -> Column {
        match self {
            Column::Int64(a) => Column::Int64(a.slice(range)),
            Column::Float64(a) => Column::Float64(a.slice(range)),
            Column::Bool(a) => Column::Bool(a.slice(range)),
            Column::Utf8(a) => Column::Utf8(a.slice(range)),
            Column::List(l) => {
                let child = l.child.slice(range.start * l.size..range.end * l.size);
                Column::List(ListArray::new(l.size, l.validity[range].to_vec(), child))
            }
        }
    }

    /// Concatenates columns of identical dtype and dims.
    pub fn concat(parts: &[&Column]) -> Option<Column> {
        let first = *parts.first()?;
        let mut out = first.clone();
        for part in &parts[1..] {
            out.append(part)?;
        }
        Some(out)
    }

    fn append(&mut self, other: &Column) -> Option<()> {
        match (self, other) {
            (Column::Int64(a), Column::Int64(b)) => a.extend(b),
            (Column::Float64(a), Column::Float64(b)) => a.extend(b),
            (Column::Bool(a), Column::Bool(b)) => a.extend(b),
            (Column::Utf8(a), Column::Utf8(b)) => a.extend(b),
            (Column::List(a), Column::List(b)) if a.size == b.size => {
                a.validity.extend_from_slice(&b.validity);
                a.child.append(&b.child)?;
            }
            _ => return None,
        }
        Some(())
    }
}

/// Nulls out the child slots of null list rows.
pub fn blank_null_rows(list: ListArray) -> ListArray {
    if list.validity.iter().all(|v| *v) {
        return list;
    }
    let ListArray {
        size,
        validity,
        child,
    } = list;
    let slot_valid: Vec<bool> = validity
        .iter()
        .flat_map(|v| std::iter::repeat(*v).take(size))
        .collect();
    let child = mask_column(*child, &slot_valid);
    ListArray::new(size, validity, child)
}

/// Forces rows where `keep[i] == false` to null, recursively.
pub fn mask_column(col: Column, keep: &[bool]) -> Column {
    fn mask<T: Clone + Default>(mut a: Array<T>, keep: &[bool]) -> Array<T> {
        for (i, k) in keep.iter().enumerate() {
            if !k && a.validity[i] {
                a.validity[i] = false;
                a.values[i] = T::default();
            }
        }
        a
    }
    match col {
        Column::Int64(a) => Column::Int64(mask(a, keep)),
        Column::Float64(a) => Column::Float64(mask(a, keep)),
        Column::Bool(a) => Column::Bool(mask(a, keep)),
        Column::Utf8(a) => Column::Utf8(mask(a, keep)),
        Column::List(l) => {
            let size = l.size;
            let validity: Vec<bool> = l.validity.iter().zip(keep).map(|(a, b)| *a && *b).collect();
            let child_keep: Vec<bool> = keep
                .iter()
                .flat_map(|k| std::iter::repeat(*k).take(size))
                .collect();
            let child = mask_column(*l.child, &child_keep);
            Column::List(ListArray::new(size, validity, child))
        }
    }
}

fn build_leaf(dtype: DType, values: &[Value]) -> Result<Column, String> {
    fn collect<T: Clone + Default>(
        values: &[Value],
        dtype: DType,
        pick: impl Fn(&Value) -> Option<T>,
    ) -> Result<Array<T>, String> {
        let mut out = Array::with_capacity(values.len());
        for v in values {
            if v.is_null() {
                out.push_null();
            } else {
                match pick(v) {
                    Some(x) => out.push(Some(x)),
                    None => return Err(format!("expected a {dtype} scalar, got {v}")),
                }
            }
        }
        Ok(out)
    }
    Ok(match dtype {
        DType::Int64 => Column::Int64(collect(values, dtype, Value::as_i64)?),
        DType::Float64 => Column::Float64(collect(values, dtype, |v| match v {
            Value::Float(x) => Some(*x),
            _ => None,
        })?),
        DType::Bool => Column::Bool(collect(values, dtype, Value::as_bool)?),
        DType::String => Column::Utf8(collect(values, dtype, |v| v.as_str().map(str::to_string))?),
    })
}

/// A columnar block of rows sharing one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordBatch {
    schema: Schema,
    columns: Vec<Column>,
    nrows: usize,
}

impl RecordBatch {
    pub fn new(schema: Schema, columns: Vec<Column>, nrows: usize) -> Result<Self, SchemaError> {
        if columns.len() != schema.len() {
            return Err(SchemaError::ColumnCount {
                expected: schema.len(),
                got: columns.len(),
            });
        }
        for (field, col) in schema.fields().iter().zip(&columns) {
            check_column(field, col, nrows)?;
        }
        Ok(RecordBatch {
            schema,
            columns,
            nrows,
        })
    }

    pub fn empty(schema: Schema) -> Result<Self, SchemaError> {
        schema.require_fixed()?;
        let columns = schema
            .fields()
            .iter()
            .map(|f| Column::nulls(f.dtype, &f.shape.fixed_dims().unwrap_or_default(), 0))
            .collect();
        Ok(RecordBatch {
            schema,
            columns,
            nrows: 0,
        })
    }

    /// Builds a batch from rows given in schema field order.
    pub fn from_rows(schema: Schema, rows: &[Vec<Value>]) -> Result<Self, SchemaError> {
        schema.require_fixed()?;
        let mut columns = Vec::with_capacity(schema.len());
        for (j, field) in schema.fields().iter().enumerate() {
            let mut cells = Vec::with_capacity(rows.len());
            for row in rows {
                if row.len() != schema.len() {
                    return Err(SchemaError::ColumnCount {
                        expected: schema.len(),
                        got: row.len(),
                    });
                }
                cells.push(row[j].clone());
            }
            let dims = field.shape.fixed_dims().unwrap_or_default();
            let col = Column::from_values(field.dtype, &dims, &cells).map_err(|message| {
                SchemaError::Conform {
                    field: field.name.clone(),
                    message,
                }
            })?;
            columns.push(col);
        }
        Ok(RecordBatch {
            schema,
            columns,
            nrows: rows.len(),
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn num_rows(&self) -> usize {
        self.nrows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.schema.index_of(name).map(|i| &self.columns[i])
    }

    pub fn column_at(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    pub fn row(&self, i: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c.value(i)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<Value>> {
        (0..self.nrows).map(|i| self.row(i)).collect()
    }

    /// Appends a column; the column must match the field and row count.
    pub fn push_column(&mut self, field: FieldSpec, column: Column) -> Result<(), SchemaError> {
        check_column(&field, &column, self.nrows)?;
        self.schema.push(field)?;
        self.columns.push(column);
        Ok(())
    }

    pub fn select(&self, names: &[&str]) -> Result<RecordBatch, SchemaError> {
        let mut fields = Vec::with_capacity(names.len());
        let mut columns = Vec::with_capacity(names.len());
        for name in names {
            let i = self.schema.index_of(name).ok_or_else(|| SchemaError::Conform {
                field: name.to_string(),
                message: "no such column".into(),
            })?;
            fields.push(self.schema.fields()[i].clone());
            columns.push(self.columns[i].clone());
        }
        Ok(RecordBatch {
            schema: Schema::new(fields)?,
            columns,
            nrows: self.nrows,
        })
    }

    pub fn slice(&self, range: Range<usize>) -> RecordBatch {
        RecordBatch {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.slice(range.clone())).collect(),
            nrows: range.len(),
        }
    }

    pub fn concat(batches: &[RecordBatch]) -> Result<Option<RecordBatch>, SchemaError> {
        let Some(first) = batches.first() else {
            return Ok(None);
        };
        if batches.iter().any(|b| b.schema != first.schema) {
            return Err(SchemaError::SchemaMismatch);
        }
        let columns = (0..first.columns.len())
            .map(|j| {
                let parts: Vec<&Column> = batches.iter().map(|b| &b.columns[j]).collect();
                Column::concat(&parts).expect("same schema implies same layout")
            })
            .collect();
        Ok(Some(RecordBatch {
            schema: first.schema.clone(),
            columns,
            nrows: batches.iter().map(|b| b.nrows).sum(),
        }))
    }

    /// Splits into `k` contiguous partitions of near-equal size.
    pub fn partition(&self, k: usize) -> Vec<RecordBatch> {
        let k = k.max(1);
        let base = self.nrows / k;
        let extra = self.nrows % k;
        let mut start = 0;
        (0..k)
            .map(|i| {
                let len = base + usize::from(i < extra);
                let part = self.slice(start..start + len);
                start += len;
                part
            })
            .collect()
    }
}

fn check_column(field: &FieldSpec, col: &Column, nrows: usize) -> Result<(), SchemaError> {
    if col.len() != nrows {
        return Err(SchemaError::RowCount {
            field: field.name.clone(),
            expected: nrows,
            got: col.len(),
        });
    }
    let dims = field.shape.fixed_dims().ok_or_else(|| SchemaError::VariableDim {
        field: field.name.clone(),
    })?;
    if col.dtype() != field.dtype || col.dims() != dims {
        return Err(SchemaError::Conform {
            field: field.name.clone(),
            message: format!(
                "column is {} {}, field declares {} {}",
                col.dtype(),
                col.shape(),
                field.dtype,
                field.shape
            ),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn schema() -> Schema {
        Schema::new(vec![
            FieldSpec::scalar("id", DType::Int64),
            FieldSpec::new("tags", DType::String, ShapeSpec::list(2)),
            FieldSpec::new("grid", DType::Float64, ShapeSpec::nested(2, 2)),
        ])
        .unwrap()
    }

    #[test]
    fn rows_round_trip() {
        let rows = vec![
            vec![
                Value::Int(1),
                Value::list(["a", "b"]),
                Value::List(vec![Value::list([1.0, 2.0]), Value::Null]),
            ],
            vec![Value::Null, Value::Null, Value::Null],
        ];
        let batch = RecordBatch::from_rows(schema(), &rows).unwrap();
        assert_eq!(batch.num_rows(), 2);
        assert_eq!(batch.rows(), rows);
        let grid = batch.column("grid").unwrap();
        assert_eq!(grid.dims(), vec![2, 2]);
        assert_eq!(grid.leaf().len(), 8);
        // Slots behind a null list are null.
        assert!((4..8).all(|i| !grid.leaf().is_valid(i)));
    }

    #[test]
    fn rejects_wrong_shapes() {
        let bad = vec![vec![Value::Int(1), Value::list(["a"]), Value::Null]];
        assert!(RecordBatch::from_rows(schema(), &bad).is_err());
        let bad = vec![vec![Value::Float(1.0), Value::Null, Value::Null]];
        assert!(RecordBatch::from_rows(schema(), &bad).is_err());
    }

    #[test]
    fn empty_batch_keeps_schema() {
        let b = RecordBatch::empty(schema()).unwrap();
        assert_eq!(b.num_rows(), 0);
        assert_eq!(b.schema().len(), 3);
        assert_eq!(b.column("grid").unwrap().dims(), vec![2, 2]);
    }

    #[test]
    fn partition_and_concat() {
        let rows: Vec<Vec<Value>> = (0..7)
            .map(|i| vec![Value::Int(i), Value::Null, Value::Null])
            .collect();
        let batch = RecordBatch::from_rows(schema(), &rows).unwrap();
        let parts = batch.partition(3);
        assert_eq!(parts.iter().map(|p| p.num_rows()).collect::<Vec<_>>(), vec![3, 2, 2]);
        assert_eq!(RecordBatch::concat(&parts).unwrap().unwrap(), batch);
    }

    fn cell() -> impl Strategy<Value = Value> {
        let leaf = prop_oneof![Just(Value::Null), (-5i64..5).prop_map(Value::Int)];
        prop_oneof![
            Just(Value::Null),
            proptest::collection::vec(leaf, 3).prop_map(Value::List)
        ]
    }

    proptest! {
        #[test]
        fn column_access_returns_inserted_values(cells in proptest::collection::vec(cell(), 0..20)) {
            let col = Column::from_values(DType::Int64, &[3], &cells).unwrap();
            prop_assert_eq!(col.values(), cells);
        }
    }
}
