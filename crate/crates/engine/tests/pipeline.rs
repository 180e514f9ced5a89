use std::collections::HashMap;

use featherpipe_core::{DType, FieldSpec, FittedState, RecordBatch, Schema, ShapeSpec, Value};
use featherpipe_engine::{fit, EngineError, FittedPipeline, PipelineSpec};
use serde_json::json;

const SPEC: &str = include_str!("../../../samples/movielens/pipeline.json");
const BUNDLE: &str = include_str!("../../runtime/tests/fixtures/movielens.bundle.json");

fn movielens_rows() -> Vec<(i64, i64, i64, &'static str)> {
    vec![
        (1, 7, 3, "Comedy|Action"),
        (2, 7, 3, "Comedy"),
        (3, 1, 10, "Drama|Comedy"),
        (4, 7, 3, "Action"),
        (5, 1, 10, "Comedy|Drama|Action"),
        (6, 3, 0, "Comedy"),
    ]
}

fn movielens_batch(spec: &PipelineSpec) -> RecordBatch {
    let rows: Vec<Vec<Value>> = movielens_rows()
        .into_iter()
        .map(|(u, m, o, g)| vec![Value::Int(u), Value::Int(m), Value::Int(o), Value::str(g)])
        .collect();
    RecordBatch::from_rows(spec.inputs.clone(), &rows).unwrap()
}

fn labels(fp: &FittedPipeline, stage: &str) -> Vec<String> {
    match fp.state(stage) {
        Some(FittedState::Vocabulary { labels }) => labels.clone(),
        other => panic!("no vocabulary for {stage}: {other:?}"),
    }
}

/// Count-and-sort oracle: frequency descending, ties by label.
fn oracle_labels<'a>(items: impl Iterator<Item = &'a str>, mask: Option<&str>) -> Vec<String> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for s in items.filter(|s| Some(*s) != mask) {
        *counts.entry(s).or_default() += 1;
    }
    let mut v: Vec<_> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    v.into_iter().map(|(s, _)| s.to_string()).collect()
}

#[test]
fn movielens_fit_matches_oracle_and_fixture() {
    let spec = PipelineSpec::parse(SPEC).unwrap();
    assert_eq!(spec.stages.len(), 5);
    let fp = fit(&spec, &[movielens_batch(&spec)]).unwrap();

    let rows = movielens_rows();
    let movies: Vec<String> = rows.iter().map(|r| r.1.to_string()).collect();
    assert_eq!(labels(&fp, "movie_id_string_indexer"), oracle_labels(movies.iter().map(String::as_str), None));
    let genres = rows.iter().flat_map(|r| r.3.split('|'));
    let genre_labels = labels(&fp, "genres_string_indexer");
    assert_eq!(genre_labels, oracle_labels(genres, Some("PADDED")));
    assert!(!genre_labels.iter().any(|l| l == "PADDED"));

    assert_eq!(fp.export().to_json_string(), BUNDLE);
}

#[test]
fn movielens_transform() {
    let spec = PipelineSpec::parse(SPEC).unwrap();
    let batch = movielens_batch(&spec);
    let fp = fit(&spec, std::slice::from_ref(&batch)).unwrap();
    let out = fp.transform(&batch).unwrap();
    assert_eq!(out.schema(), fp.output_schema());
    assert_eq!(out.num_rows(), 6);
    let genres = out.column("Genres_indexed").unwrap().values();
    // Comedy 2, Action 3 after mask 0 and OOV 1.
    assert_eq!(genres[0], Value::list([2i64, 3, 0, 0, 0, 0]));
    let onehot = out.column("Occupation_indexed").unwrap().values();
    assert_eq!(onehot[2], Value::list([0.0, 1.0, 0.0]));
    assert_eq!(fp.transform(&batch).unwrap(), out);
}

#[test]
fn partitioning_does_not_change_the_fit() {
    let spec = PipelineSpec::parse(SPEC).unwrap();
    let batch = movielens_batch(&spec);
    let one = fit(&spec, std::slice::from_ref(&batch)).unwrap().export().to_json_string();
    for k in [2, 4, 6, 9] {
        let mut parts = batch.partition(k);
        assert_eq!(fit(&spec, &parts).unwrap().export().to_json_string(), one, "k={k}");
        parts.reverse();
        assert_eq!(fit(&spec, &parts).unwrap().export().to_json_string(), one, "reversed k={k}");
    }
}

fn numeric_spec(stages: serde_json::Value) -> PipelineSpec {
    PipelineSpec::parse(
        &json!({
            "version": 1,
            "inputs": [
                {"name": "x", "dtype": "float64", "shape": []},
                {"name": "v", "dtype": "float64", "shape": [3]}
            ],
            "stages": stages,
        })
        .to_string(),
    )
    .unwrap()
}

fn numeric_batch(rows: &[(Option<f64>, [Option<f64>; 3])]) -> RecordBatch {
    let schema = Schema::new(vec![
        FieldSpec::scalar("x", DType::Float64),
        FieldSpec::new("v", DType::Float64, ShapeSpec::list(3)),
    ])
    .unwrap();
    let rows: Vec<Vec<Value>> = rows
        .iter()
        .map(|(x, v)| vec![Value::from(*x), Value::List(v.iter().map(|e| Value::from(*e)).collect())])
        .collect();
    RecordBatch::from_rows(schema, &rows).unwrap()
}

#[test]
fn scaler_and_imputer() {
    let spec = numeric_spec(json!([
        {"name": "scale", "op": "standard_scale", "inputs": ["v"], "outputs": ["v_scaled"]},
        {"name": "fill", "op": "impute", "inputs": ["x"], "outputs": ["x_filled"], "params": {"strategy": "median", "sentinel": -1.0}},
        {"name": "mean", "op": "impute", "inputs": ["x"], "outputs": ["x_mean"], "params": {"strategy": "mean"}}
    ]));
    let batch = numeric_batch(&[
        (Some(1.0), [Some(1.0), Some(5.0), None]),
        (None, [Some(2.0), Some(5.0), Some(1.0)]),
        (Some(9.0), [Some(3.0), Some(5.0), Some(3.0)]),
        (Some(-1.0), [Some(2.0), Some(5.0), None]),
        (Some(2.0), [Some(2.0), Some(5.0), None]),
    ]);
    let fp = fit(&spec, &batch.partition(2)).unwrap();
    match fp.state("scale").unwrap() {
        FittedState::Moments { mean, std } => {
            assert_eq!(mean, &vec![2.0, 5.0, 2.0]);
            assert_eq!(std[1], 0.0);
            assert!((std[0] - (0.4f64).sqrt()).abs() < 1e-15);
            assert_eq!(std[2], 1.0);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(fp.state("fill"), Some(&FittedState::Impute { value: 2.0 }));
    assert_eq!(fp.state("mean"), Some(&FittedState::Impute { value: 11.0 / 4.0 }));
    let out = fp.transform(&batch).unwrap();
    assert_eq!(
        out.column("x_filled").unwrap().values(),
        vec![Value::Float(1.0), Value::Float(2.0), Value::Float(9.0), Value::Float(2.0), Value::Float(2.0)]
    );
    let scaled = out.column("v_scaled").unwrap().values();
    assert_eq!(scaled[1], Value::List(vec![Value::Float(0.0), Value::Float(0.0), Value::Float(-1.0)]));
    assert_eq!(scaled[0].as_list().unwrap()[2], Value::Null);
}

#[test]
fn fit_errors() {
    let spec = numeric_spec(json!([
        {"name": "fill", "op": "impute", "inputs": ["x"], "outputs": ["y"], "params": {"strategy": "mean"}}
    ]));
    let err = fit(&spec, &[numeric_batch(&[(None, [None, None, None])])]).unwrap_err();
    assert!(matches!(err, EngineError::AllMissing { .. }), "{err}");

    let spec = numeric_spec(json!([
        {"name": "scale", "op": "standard_scale", "inputs": ["v"], "outputs": ["w"]}
    ]));
    let err = fit(&spec, &[numeric_batch(&[(None, [Some(1.0), None, Some(2.0)])])]).unwrap_err();
    assert!(err.to_string().contains("position 1"), "{err}");

    let spec = PipelineSpec::parse(
        &json!({
            "version": 1,
            "inputs": [{"name": "s", "dtype": "string", "shape": []}],
            "stages": [{"name": "idx", "op": "string_index", "inputs": ["s"], "outputs": ["i"], "params": {"maskToken": "PADDED"}}]
        })
        .to_string(),
    )
    .unwrap();
    let schema = spec.inputs.clone();
    let rows = vec![vec![Value::str("PADDED")], vec![Value::str("PADDED")]];
    let err = fit(&spec, &[RecordBatch::from_rows(schema, &rows).unwrap()]).unwrap_err();
    assert!(matches!(err, EngineError::EmptyVocabulary { ref stage } if stage == "idx"), "{err}");
}

#[test]
fn transform_errors_carry_context() {
    let spec = numeric_spec(json!([
        {"name": "log", "op": "log_transform", "inputs": ["x"], "outputs": ["y"]}
    ]));
    let batch = numeric_batch(&[
        (Some(1.0), [None, None, None]),
        (Some(2.0), [None, None, None]),
        (Some(-3.0), [None, None, None]),
    ]);
    let fp = fit(&spec, &[]).unwrap();
    let err = fp.transform_partitions(&batch.partition(2)).unwrap_err();
    match err {
        EngineError::Transform { stage, column, partition, row, .. } => {
            assert_eq!((stage.as_str(), column.as_str(), partition, row), ("log", "x", 1, 0));
        }
        other => panic!("{other}"),
    }
}

#[test]
fn stateless_pipelines_and_empty_batches() {
    let spec = numeric_spec(json!([
        {"name": "log", "op": "log_transform", "inputs": ["x"], "outputs": ["y"]}
    ]));
    let fp = fit(&spec, &[]).unwrap();
    let out = fp.transform(&numeric_batch(&[(Some(1.0), [None, None, None])])).unwrap();
    assert_eq!(out.column("y").unwrap().values(), vec![Value::Float(0.0)]);
    let empty = fp.transform(&numeric_batch(&[])).unwrap();
    assert_eq!(empty.num_rows(), 0);
    assert_eq!(empty.schema(), fp.output_schema());
}

#[test]
fn declaration_order_does_not_matter() {
    let a = json!({"name": "a", "op": "standard_scale", "inputs": ["v"], "outputs": ["w"]});
    let b = json!({"name": "b", "op": "list_aggregate", "inputs": ["w"], "outputs": ["s"], "params": {"kind": "sum"}});
    let c = json!({"name": "c", "op": "impute", "inputs": ["s"], "outputs": ["t"], "params": {"strategy": "median"}});
    let batch = numeric_batch(&[
        (Some(1.0), [Some(1.0), Some(5.0), Some(4.0)]),
        (None, [Some(2.0), Some(6.0), Some(1.0)]),
        (Some(9.0), [Some(3.0), None, Some(3.0)]),
    ]);
    let forward = fit(&numeric_spec(json!([a, b, c])), std::slice::from_ref(&batch)).unwrap();
    let backward = fit(&numeric_spec(json!([c, b, a])), std::slice::from_ref(&batch)).unwrap();
    assert_eq!(forward.export(), backward.export());
    assert_eq!(forward.transform(&batch).unwrap(), backward.transform(&batch).unwrap());
}

#[test]
fn bundle_round_trip() {
    let manifest = featherpipe_core::BundleManifest::from_json_str(BUNDLE).unwrap();
    let fp = FittedPipeline::from_manifest(&manifest).unwrap();
    assert_eq!(fp.export(), manifest);
}
