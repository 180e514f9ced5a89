//! Reading datasets as record batches and writing jsonlines.

use std::fs;
use std::io::Write;
use std::path::Path;

use featherpipe_core::json::{row_to_json, value_from_json};
use featherpipe_core::value::parse_f64;
use featherpipe_core::{DType, FieldSpec, RecordBatch, Schema, Value};
use serde_json::Value as Json;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    /// `.csv` files are csv; anything else is jsonlines.
    pub fn detect(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

/// How a dataset file is decoded.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestionConfig {
    pub format: Format,
    /// CSV cells equal to this string are null.
    pub null_token: String,
    pub partitions: usize,
}

impl IngestionConfig {
    pub fn for_path(path: &Path, format: Option<Format>) -> Self {
        IngestionConfig {
            format: format.unwrap_or_else(|| Format::detect(path)),
            null_token: String::new(),
            partitions: 1,
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if path == Path::new("-") {
        std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(path, e))
    } else {
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

/// Reads `path` into `cfg.partitions` batches holding the `schema` columns.
/// Jsonlines fields that are absent read as null; extra fields are ignored.
pub fn read_dataset(path: &Path, schema: &Schema, cfg: &IngestionConfig) -> Result<Vec<RecordBatch>, CliError> {
    let text = read_text(path)?;
    let rows = match cfg.format {
        Format::Jsonl => parse_jsonl(&text, schema),
        Format::Csv => parse_csv(&text, schema, &cfg.null_token),
    }
    .map_err(|m| CliError::Parse(format!("{}: {m}", path.display())))?;
    let batch = RecordBatch::from_rows(schema.clone(), &rows).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(batch.partition(cfg.partitions.max(1)))
}

pub fn parse_jsonl(text: &str, schema: &Schema) -> Result<Vec<Vec<Value>>, String> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = |m: String| format!("line {}: {m}", i + 1);
        let doc: Json = serde_json::from_str(line).map_err(|e| at(e.to_string()))?;
        let obj = doc.as_object().ok_or_else(|| at("expected a JSON object".into()))?;
        let row = schema
            .fields()
            .iter()
            .map(|f| match obj.get(&f.name) {
                None => Ok(Value::Null),
                Some(v) => value_from_json(v, f).map_err(|m| at(format!("field `{}`: {m}", f.name))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn parse_cell(cell: &str, field: &FieldSpec, null_token: &str) -> Result<Value, String> {
    if cell == null_token {
        return Ok(Value::Null);
    }
    let bad = || format!("field `{}`: cannot read `{cell}` as {}", field.name, field.dtype);
    match field.dtype {
        DType::Int64 => cell.trim().parse().map(Value::Int).map_err(|_| bad()),
        DType::Float64 => parse_f64(cell.trim()).map(Value::Float).ok_or_else(bad),
        DType::Bool => match cell.trim() {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(bad()),
        },
        DType::String => Ok(Value::str(cell)),
    }
}

pub fn parse_csv(text: &str, schema: &Schema, null_token: &str) -> Result<Vec<Vec<Value>>, String> {
    if let Some(f) = schema.fields().iter().find(|f| !f.shape.is_scalar()) {
        return Err(format!(
            "column `{}` is list-valued; csv supports scalar columns only, use jsonlines",
            f.name
        ));
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let positions = schema
        .fields()
        .iter()
        .map(|f| {
            headers
                .iter()
                .position(|h| h == f.name)
                .ok_or_else(|| format!("missing column `{}`", f.name))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let at = |m: String| format!("record {}: {m}", i + 1);
        let record = record.map_err(|e| at(e.to_string()))?;
        let row = schema
            .fields()
            .iter()
            .zip(&positions)
            .map(|(f, &p)| parse_cell(record.get(p).unwrap_or(""), f, null_token).map_err(at))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// One JSON object per row, keys restricted to `select` when given.
pub fn to_jsonl(batches: &[RecordBatch], select: Option<&[String]>) -> Result<String, CliError> {
    let mut out = String::new();
    for b in batches {
        let b = match select {
            Some(cols) => {
                let names: Vec<&str> = cols.iter().map(String::as_str).collect();
                b.select(&names).map_err(|e| CliError::Validation(e.to_string()))?
            }
            None => b.clone(),
        };
        for row in b.rows() {
            out.push_str(&row_to_json(b.schema(), &row).to_string());
            out.push('\n');
        }
    }
    Ok(out)
}
