use featherpipe_core::ops::OrderType;
use featherpipe_core::{FittedState, OpKind, RecordBatch};
use featherpipe_engine::{fit, PipelineSpec};
use featherpipe_parity::*;

fn spec(text: &str) -> PipelineSpec {
    PipelineSpec::parse(text).unwrap()
}

fn indexer() -> PipelineSpec {
    spec(
        r#"{"version": 1,
            "inputs": [{"name": "g", "dtype": "string", "shape": []}],
            "stages": [{"name": "idx", "op": "string_index", "inputs": ["g"],
                        "outputs": ["g_idx"], "params": {}}]}"#,
    )
}

#[test]
fn sweep_smoke_every_kind_passes() {
    let cases = sweep_cases(2, 300, 11);
    assert_eq!(cases.len(), 48);
    for (case, report) in cases.iter().zip(run_sweep(&cases)) {
        assert!(
            report.passed(),
            "{} failed:\n{}\n{}",
            case.kind,
            case.spec.to_json_string(),
            report.lines()
        );
        assert!(report.total_cells > 0, "{} compared nothing", case.kind);
    }
}

#[test]
fn swapped_labels_are_caught() {
    let cs = CorpusSpec::for_spec(&indexer(), 3, 500).hint("g", Hint::Words);
    let data = generate_corpus(&cs, &indexer().inputs);
    let report = check_parity_with(&indexer(), &data, &data, Some(Fault::SwapLabels));
    assert!(!report.passed());
    assert!(report.mismatches.iter().all(|m| m.column == "g_idx"));
    assert!(report.lines().contains("column g_idx"));
}

#[test]
fn empty_corpus_passes_with_zero_cells() {
    let spec = spec(
        r#"{"version": 1,
            "inputs": [{"name": "x", "dtype": "float64", "shape": []}],
            "stages": [{"name": "l", "op": "log_transform", "inputs": ["x"],
                        "outputs": ["y"], "params": {"alpha": 1.0}}]}"#,
    );
    let cs = CorpusSpec { n_rows: 0, ..CorpusSpec::default() };
    let report = check_parity(&spec, &generate_corpus(&cs, &spec.inputs));
    assert!(report.passed());
    assert_eq!(report.total_cells, 0);
    assert_eq!(report.summary()["status"], "pass");
}

#[test]
fn fit_failure_is_reported() {
    let cs = CorpusSpec { n_rows: 10, null_prob: 1.0, ..CorpusSpec::default() };
    let report = check_parity(&indexer(), &generate_corpus(&cs, &indexer().inputs));
    assert!(!report.passed());
    assert!(report.failure.unwrap().contains("fit failed"));
}

#[test]
fn fitted_vocabulary_agrees_with_oracle() {
    let cs = CorpusSpec::for_spec(&indexer(), 5, 2000).hint("g", Hint::Words);
    let data = generate_corpus(&cs, &indexer().inputs);
    let fp = fit(&indexer(), &data).unwrap();
    let values: Vec<String> = data
        .iter()
        .flat_map(RecordBatch::rows)
        .filter_map(|r| r[0].as_str().map(String::from))
        .collect();
    let expected = oracle_string_index(values.iter().map(String::as_str), OrderType::FrequencyDesc, None);
    assert_eq!(fp.state("idx"), Some(&FittedState::Vocabulary { labels: expected }));
}

#[test]
fn ranking_pipeline_matches_on_a_small_corpus() {
    let spec = ltr_spec();
    assert_eq!(spec.stages.len(), 60);
    let data = generate_corpus(&ltr_corpus(1, 800), &spec.inputs);
    let report = check_parity(&spec, &data);
    assert!(report.passed(), "{}", report.lines());
    assert!(report.total_cells > 800 * 60);
}

#[test]
fn partitioning_does_not_change_outputs() {
    let spec = ltr_spec();
    let one = CorpusSpec { partitions: 1, ..ltr_corpus(2, 600) };
    let whole = generate_corpus(&one, &spec.inputs);
    let reference = fit(&spec, &whole).unwrap().export().to_json_string();
    for k in [2, 3, 7] {
        let cs = CorpusSpec { partitions: k, ..one.clone() };
        let parts = generate_corpus(&cs, &spec.inputs);
        assert_eq!(fit(&spec, &parts).unwrap().export().to_json_string(), reference, "k={k}");
    }
}

#[test]
fn every_kind_has_a_generator() {
    for kind in OpKind::ALL {
        let case = random_case(kind, 99);
        assert_eq!(case.spec.stages[0].op.kind(), kind);
        assert!(!case.spec.inputs.is_empty());
    }
}

#[test]
fn empty_corpus_passes_even_with_estimators() {
    let cs = CorpusSpec { n_rows: 0, ..CorpusSpec::default() };
    let report = check_parity(&indexer(), &generate_corpus(&cs, &indexer().inputs));
    assert!(report.passed());
    assert_eq!(report.total_cells, 0);
}
