//! Subcommand implementations. Each writes its primary output to `out`.

use std::io::Write;
use std::path::{Path, PathBuf};

use featherpipe_core::{BundleManifest, BundleOp, FittedState, ManifestError, RecordBatch};
use featherpipe_engine::{fit, EngineError, FittedPipeline, PipelineSpec};
use featherpipe_parity::{check_parity_with, generate_corpus, CorpusSpec, Fault};
use featherpipe_runtime::{ExecutablePlan, RowError, RowMode};
use serde_json::{json, Value as Json};

use crate::error::CliError;
use crate::ingest::{read_dataset, read_text, to_jsonl, write_text, IngestionConfig};

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn engine_error(e: EngineError) -> CliError {
    match e {
        EngineError::SpecParse { .. } => CliError::Parse(e.to_string()),
        EngineError::Manifest(ManifestError::Parse(_)) => CliError::Parse(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

fn manifest_error(path: &Path, e: ManifestError) -> CliError {
    let msg = format!("{}: {e}", path.display());
    match e {
        ManifestError::Parse(_) => CliError::Parse(msg),
        _ => CliError::Validation(msg),
    }
}

pub fn load_spec(path: &Path) -> Result<PipelineSpec, CliError> {
    PipelineSpec::parse(&read_text(path)?).map_err(|e| match engine_error(e) {
        CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn load_manifest(path: &Path) -> Result<BundleManifest, CliError> {
    BundleManifest::from_json_str(&read_text(path)?).map_err(|e| manifest_error(path, e))
}

pub fn load_plan(path: &Path) -> Result<ExecutablePlan, CliError> {
    ExecutablePlan::load_str(&read_text(path)?).map_err(|e| manifest_error(path, e))
}

/// Per-estimator learned state, for the fit summary.
pub fn fit_summary(fp: &FittedPipeline) -> Json {
    let stages: Vec<Json> = fp
        .stages()
        .iter()
        .filter_map(|s| {
            let state = s.state.as_ref()?;
            let mut entry = json!({"name": s.stage.name, "op": s.stage.op.kind().name()});
            match state {
                FittedState::Vocabulary { labels } => entry["vocabularySize"] = json!(labels.len()),
                FittedState::Moments { .. } | FittedState::Impute { .. } => {
                    if let Json::Object(m) = state.to_json() {
                        entry.as_object_mut().expect("object").extend(m);
                    }
                }
            }
            Some(entry)
        })
        .collect();
    json!({"ops": fp.stages().len(), "estimators": stages})
}

fn fit_from(spec: &PipelineSpec, data: &Path, cfg: &IngestionConfig) -> Result<FittedPipeline, CliError> {
    let parts = read_dataset(data, &spec.inputs, cfg)?;
    log::info!("fitting {} stages on {} partitions", spec.stages.len(), parts.len());
    fit(spec, &parts).map_err(engine_error)
}

pub fn cmd_fit(
    spec_path: &Path,
    data: &Path,
    bundle_out: &Path,
    cfg: &IngestionConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let fp = fit_from(&spec, data, cfg)?;
    write_text(bundle_out, &fp.export().to_json_string())?;
    emit(out, &fit_summary(&fp).to_string())
}

/// Where `apply` gets its fitted pipeline from.
#[derive(Debug, Clone)]
pub enum PipelineSource {
    Bundle(PathBuf),
    /// Fit the spec first, on `fit_data` or else on the data being applied.
    Spec { spec: PathBuf, fit_data: Option<PathBuf> },
}

fn global_row(e: EngineError, parts: &[RecordBatch]) -> CliError {
    match e {
        EngineError::Transform {
            ref stage,
            ref column,
            partition,
            row,
            kind,
            ref message,
        } => {
            let offset: usize = parts[..partition].iter().map(RecordBatch::num_rows).sum();
            CliError::Validation(format!(
                "row {}: stage `{stage}`, column `{column}`: {kind}: {message}",
                offset + row
            ))
        }
        other => engine_error(other),
    }
}

pub fn cmd_apply(
    source: &PipelineSource,
    data: &Path,
    out_path: &Path,
    select: Option<&[String]>,
    cfg: &IngestionConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let fp = match source {
        PipelineSource::Bundle(p) => FittedPipeline::from_manifest(&load_manifest(p)?).map_err(engine_error)?,
        PipelineSource::Spec { spec, fit_data } => {
            let spec = load_spec(spec)?;
            let fit_path = fit_data.as_deref().unwrap_or(data);
            let fit_cfg = IngestionConfig::for_path(fit_path, (fit_path == data).then_some(cfg.format));
            let fit_cfg = IngestionConfig { partitions: cfg.partitions, ..fit_cfg };
            fit_from(&spec, fit_path, &fit_cfg)?
        }
    };
    if let Some(cols) = select {
        if let Some(c) = cols.iter().find(|c| !fp.output_schema().contains(c)) {
            return Err(CliError::Validation(format!("--select: unknown column `{c}`")));
        }
    }
    let parts = read_dataset(data, fp.input_schema(), cfg)?;
    let transformed = fp.transform_partitions(&parts).map_err(|e| global_row(e, &parts))?;
    write_text(out_path, &to_jsonl(&transformed, select)?)?;
    let columns: Vec<&str> = match select {
        Some(cols) => cols.iter().map(String::as_str).collect(),
        None => fp.output_schema().names().collect(),
    };
    let rows: usize = transformed.iter().map(RecordBatch::num_rows).sum();
    log::info!("wrote {rows} rows to {}", out_path.display());
    if out_path != Path::new("-") {
        emit(out, &json!({"rows": rows, "columns": columns}).to_string())?;
    }
    Ok(())
}

pub fn cmd_infer(bundle: &Path, row: &str, mode: RowMode, out: &mut dyn Write) -> Result<(), CliError> {
    let plan = load_plan(bundle)?;
    let doc: Json = serde_json::from_str(row).map_err(|e| CliError::Parse(format!("--row: {e}")))?;
    match plan.execute_json(&doc, mode) {
        Ok(result) => emit(out, &result.to_string()),
        Err(RowError::Validation(e)) => Err(CliError::RowValidation(e.to_string())),
        Err(RowError::Exec(e)) => Err(CliError::Validation(e.to_string())),
    }
}

/// Settings for a parity run over generated rows.
#[derive(Debug, Clone)]
pub struct ParityOptions {
    pub rows: usize,
    pub seed: u64,
    pub partitions: usize,
    pub fault: Option<Fault>,
    pub summary: Option<PathBuf>,
}

/// Fits on one generated corpus, compares both backends on a second one,
/// prints one line per mismatch and then the summary document.
pub fn cmd_parity(spec_path: &Path, opts: &ParityOptions, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let cs = CorpusSpec {
        partitions: opts.partitions.max(1),
        ..CorpusSpec::for_spec(&spec, opts.seed, opts.rows)
    };
    let fit_data = generate_corpus(&cs, &spec.inputs);
    let eval = CorpusSpec {
        seed: opts.seed.wrapping_add(1),
        ..cs
    };
    let eval_data = generate_corpus(&eval, &spec.inputs);
    let report = check_parity_with(&spec, &fit_data, &eval_data, opts.fault);
    let lines = report.lines();
    if !lines.is_empty() {
        write!(out, "{lines}").map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    }
    let summary = report.summary().to_string();
    emit(out, &summary)?;
    if let Some(p) = &opts.summary {
        write_text(p, &format!("{summary}\n"))?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::ParityFailed)
    }
}

/// Validates a spec and writes it in bundle form without fitted state.
pub fn cmd_export(spec_path: &Path, out_path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let manifest = BundleManifest {
        inputs: spec.inputs.clone(),
        ops: spec
            .topo_order()
            .map_err(engine_error)?
            .into_iter()
            .map(|i| BundleOp {
                stage: spec.stages[i].clone(),
                state: None,
            })
            .collect(),
    };
    manifest.signatures().map_err(|e| CliError::Validation(e.to_string()))?;
    write_text(out_path, &manifest.to_json_string())?;
    let estimators = manifest.ops.iter().filter(|o| o.stage.op.kind().is_estimator()).count();
    if out_path != Path::new("-") {
        emit(out, &json!({"ops": manifest.ops.len(), "unfittedEstimators": estimators}).to_string())?;
    }
    Ok(())
}

/// Binds `host:port` and serves `bundle` until interrupted.
pub fn cmd_serve(bundle: &Path, host: &str, port: u16, mode: RowMode) -> Result<(), CliError> {
    let plan = load_plan(bundle)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::io(bundle, e))?;
    runtime.block_on(async {
        let addr = format!("{host}:{port}");
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::io(Path::new(&addr), e))?;
        log::info!("serving {} on {addr}", bundle.display());
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            log::info!("shutting down");
        };
        crate::serve::serve(listener, plan, mode, shutdown)
            .await
            .map_err(|e| CliError::io(Path::new(&addr), e))
    })
}
