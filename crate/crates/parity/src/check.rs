//! Runs a pipeline through both backends and diffs every output cell.

use std::fmt::Write as _;

use featherpipe_core::json::value_to_json;
use featherpipe_core::{BundleManifest, FittedState, RecordBatch, Value};
use featherpipe_engine::{fit, EngineError, FittedPipeline, PipelineSpec};
use featherpipe_runtime::ExecutablePlan;
use rayon::prelude::*;
use serde_json::{json, Value as Json};

/// Relative tolerance for float cells.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Whether two floats agree: `|a - b| <= 1e-9 * max(1, |a|, |b|)`, NaN
/// equals NaN, and infinities must match exactly.
pub fn floats_match(a: f64, b: f64) -> bool {
    if a.is_nan() || b.is_nan() {
        return a.is_nan() && b.is_nan();
    }
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= FLOAT_TOLERANCE * 1f64.max(a.abs()).max(b.abs())
}

/// Compares two values: exact for discrete leaves, tolerant for floats.
/// On failure returns the largest float difference seen, if any.
pub fn values_match(a: &Value, b: &Value) -> Result<(), Option<f64>> {
    match (a, b) {
        (Value::Float(x), Value::Float(y)) => {
            if floats_match(*x, *y) {
                Ok(())
            } else {
                Err(Some((x - y).abs()))
            }
        }
        (Value::List(xs), Value::List(ys)) if xs.len() == ys.len() => {
            let mut worst: Option<Option<f64>> = None;
            for (x, y) in xs.iter().zip(ys) {
                if let Err(d) = values_match(x, y) {
                    worst = Some(match (worst.flatten(), d) {
                        (Some(p), Some(q)) => Some(p.max(q)),
                        (p, q) => p.or(q),
                    });
                }
            }
            worst.map_or(Ok(()), Err)
        }
        _ if a == b => Ok(()),
        _ => Err(None),
    }
}

/// One cell where the backends disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub row: usize,
    pub column: String,
    pub batch: String,
    pub bundle: String,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParityReport {
    /// Output cells compared, plus one per row where both backends failed.
    pub total_cells: usize,
    pub rows: usize,
    /// Rows on which both backends raised the same error.
    pub error_rows: usize,
    pub mismatches: Vec<Mismatch>,
    /// Set when the comparison could not run (fit or load failed).
    pub failure: Option<String>,
}

impl ParityReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.mismatches.is_empty()
    }

    /// One line per mismatch.
    pub fn lines(&self) -> String {
        let mut out = String::new();
        if let Some(f) = &self.failure {
            let _ = writeln!(out, "failure: {f}");
        }
        for m in &self.mismatches {
            let _ = write!(out, "row {} column {}: batch={} bundle={}", m.row, m.column, m.batch, m.bundle);
            if let Some(d) = m.delta {
                let _ = write!(out, " |delta|={d:e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> Json {
        json!({
            "status": if self.passed() { "pass" } else { "fail" },
            "totalCells": self.total_cells,
            "rows": self.rows,
            "errorRows": self.error_rows,
            "mismatches": self.mismatches.len(),
            "failure": self.failure,
        })
    }

    /// Folds another report in, offsetting its row numbers.
    pub fn absorb(&mut self, other: ParityReport) {
        let offset = self.rows;
        self.total_cells += other.total_cells;
        self.rows += other.rows;
        self.error_rows += other.error_rows;
        self.mismatches.extend(other.mismatches.into_iter().map(|mut m| {
            m.row += offset;
            m
        }));
        if self.failure.is_none() {
            self.failure = other.failure;
        }
    }
}

/// Deliberate bundle corruption, for checking that the harness notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Swaps the first two labels of the first vocabulary (or renames a
    /// lone label).
    SwapLabels,
}

impl Fault {
    /// Applies the fault; returns the column it should surface in.
    pub fn apply(self, manifest: &mut BundleManifest) -> Option<String> {
        match self {
            Fault::SwapLabels => {
                let op = manifest
                    .ops
                    .iter_mut()
                    .find(|op| matches!(op.state, Some(FittedState::Vocabulary { .. })))?;
                if let Some(FittedState::Vocabulary { labels }) = &mut op.state {
                    if labels.len() >= 2 {
                        labels.swap(0, 1);
                    } else {
                        labels[0].push('~');
                    }
                }
                op.stage.outputs.first().cloned()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Outcome {
    Ok(Vec<Value>),
    Err { stage: String, kind: String },
}

fn engine_outcome(e: EngineError) -> Outcome {
    match e {
        EngineError::Transform { stage, kind, .. } => Outcome::Err {
            stage,
            kind: kind.to_string(),
        },
        other => Outcome::Err {
            stage: String::new(),
            kind: other.to_string(),
        },
    }
}

fn batch_outcomes(fp: &FittedPipeline, part: &RecordBatch) -> Vec<Outcome> {
    match fp.transform(part) {
        Ok(out) => (0..out.num_rows()).map(|i| Outcome::Ok(out.row(i))).collect(),
        Err(_) => (0..part.num_rows())
            .map(|i| match fp.transform(&part.slice(i..i + 1)) {
                Ok(out) => Outcome::Ok(out.row(0)),
                Err(e) => engine_outcome(e),
            })
            .collect(),
    }
}

fn bundle_outcomes(plan: &ExecutablePlan, part: &RecordBatch) -> Vec<Outcome> {
    let inputs: Vec<&str> = plan.input_schema().names().collect();
    let part = part.select(&inputs).expect("corpus carries every input");
    (0..part.num_rows())
        .map(|i| match plan.execute_values(part.row(i)) {
            Ok(values) => Outcome::Ok(values),
            Err(e) => Outcome::Err {
                stage: e.stage,
                kind: e.kind.to_string(),
            },
        })
        .collect()
}

fn render(v: &Value) -> String {
    value_to_json(v).to_string()
}

fn describe(o: &Outcome) -> String {
    match o {
        Outcome::Ok(_) => "ok".into(),
        Outcome::Err { stage, kind } => format!("error({stage}: {kind})"),
    }
}

fn compare_partition(fp: &FittedPipeline, plan: &ExecutablePlan, part: &RecordBatch) -> ParityReport {
    let names: Vec<&str> = plan.output_schema().names().collect();
    let n_inputs = plan.input_schema().len();
    let batch = batch_outcomes(fp, part);
    let bundle = bundle_outcomes(plan, part);
    let mut report = ParityReport {
        rows: part.num_rows(),
        ..ParityReport::default()
    };
    for (row, (a, b)) in batch.iter().zip(&bundle).enumerate() {
        match (a, b) {
            (Outcome::Ok(xs), Outcome::Ok(ys)) => {
                for j in n_inputs..names.len() {
                    report.total_cells += 1;
                    if let Err(delta) = values_match(&xs[j], &ys[j]) {
                        report.mismatches.push(Mismatch {
                            row,
                            column: names[j].to_string(),
                            batch: render(&xs[j]),
                            bundle: render(&ys[j]),
                            delta,
                        });
                    }
                }
            }
            (Outcome::Err { .. }, Outcome::Err { .. }) if a == b => {
                report.total_cells += 1;
                report.error_rows += 1;
            }
            _ => {
                let column = match (a, b) {
                    (Outcome::Err { stage, .. }, _) | (_, Outcome::Err { stage, .. }) => stage.clone(),
                    _ => unreachable!("one side failed"),
                };
                report.total_cells += 1;
                report.mismatches.push(Mismatch {
                    row,
                    column,
                    batch: describe(a),
                    bundle: describe(b),
                    delta: None,
                });
            }
        }
    }
    report
}

/// Fits on `corpus` and compares both backends on the same rows.
pub fn check_parity(spec: &PipelineSpec, corpus: &[RecordBatch]) -> ParityReport {
    check_parity_with(spec, corpus, corpus, None)
}

/// Fits on `fit_data`, then compares backends on `eval_data`, optionally
/// corrupting the bundle first. An empty `eval_data` passes trivially.
pub fn check_parity_with(
    spec: &PipelineSpec,
    fit_data: &[RecordBatch],
    eval_data: &[RecordBatch],
    fault: Option<Fault>,
) -> ParityReport {
    if eval_data.iter().all(|b| b.num_rows() == 0) {
        return ParityReport::default();
    }
    let fp = match fit(spec, fit_data) {
        Ok(fp) => fp,
        Err(e) => {
            return ParityReport {
                failure: Some(format!("fit failed: {e}")),
                ..ParityReport::default()
            }
        }
    };
    check_fitted(&fp, eval_data, fault)
}

/// Compares a fitted pipeline against its exported, reloaded bundle.
pub fn check_fitted(fp: &FittedPipeline, eval_data: &[RecordBatch], fault: Option<Fault>) -> ParityReport {
    let mut manifest = fp.export();
    if let Some(f) = fault {
        f.apply(&mut manifest);
    }
    let plan = match ExecutablePlan::load_str(&manifest.to_json_string()) {
        Ok(p) => p,
        Err(e) => {
            return ParityReport {
                failure: Some(format!("bundle failed to load: {e}")),
                ..ParityReport::default()
            }
        }
    };
    let parts: Vec<ParityReport> = eval_data
        .par_iter()
        .map(|part| compare_partition(fp, &plan, part))
        .collect();
    parts.into_iter().fold(ParityReport::default(), |mut acc, r| {
        acc.absorb(r);
        acc
    })
}
