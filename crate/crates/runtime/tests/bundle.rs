use std::sync::Arc;

use featherpipe_core::Value;
use featherpipe_runtime::{BundleManifest, ExecutablePlan, ManifestError, Row, RowError, RowMode};
use serde_json::json;

const BUNDLE: &str = include_str!("fixtures/movielens.bundle.json");

fn plan() -> ExecutablePlan {
    ExecutablePlan::load_str(BUNDLE).expect("fixture loads")
}

fn row(user: i64, movie: i64, occupation: i64, genres: &str) -> Row {
    [
        ("UserID", Value::Int(user)),
        ("MovieID", Value::Int(movie)),
        ("Occupation", Value::Int(occupation)),
        ("Genres", Value::str(genres)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn ints(xs: &[i64]) -> Value {
    Value::list(xs.iter().copied())
}

fn floats(xs: &[f64]) -> Value {
    Value::list(xs.iter().copied())
}

#[test]
fn fixture_round_trips_byte_for_byte() {
    let manifest = BundleManifest::from_json_str(BUNDLE).unwrap();
    assert_eq!(manifest.to_json_string(), BUNDLE);
    assert_eq!(plan().num_ops(), 5);
}

#[test]
fn listing_one_row() {
    let out = plan().execute(&row(42, 7, 3, "Action|Comedy"), RowMode::Strict).unwrap();
    // 1 + floorMod(murmur3_32("42", 42), 10000)
    assert_eq!(out["UserID_indexed"], Value::Int(3645));
    // No mask: OOV slot 0, labels from 1.
    assert_eq!(out["MovieID_indexed"], Value::Int(1));
    assert_eq!(out["Occupation_indexed"], floats(&[1.0, 0.0, 0.0]));
    // Mask 0, OOV 1, Comedy 2, Action 3.
    assert_eq!(out["Genres_indexed"], ints(&[3, 2, 0, 0, 0, 0]));
    assert_eq!(out["Genres"], Value::str("Action|Comedy"));
    assert_eq!(out.len(), 9);
}

#[test]
fn unseen_values() {
    let out = plan().execute(&row(1, 999, 99, "Western"), RowMode::Strict).unwrap();
    assert_eq!(out["MovieID_indexed"], Value::Int(0));
    assert_eq!(out["Occupation_indexed"], floats(&[0.0, 0.0, 0.0]));
    assert_eq!(out["Genres_indexed"], ints(&[1, 0, 0, 0, 0, 0]));
}

#[test]
fn nulls_propagate() {
    let mut r = row(1, 7, 3, "Drama");
    r.insert("MovieID".into(), Value::Null);
    let out = plan().execute(&r, RowMode::Strict).unwrap();
    assert_eq!(out["MovieID_indexed"], Value::Null);
    assert_eq!(out["Genres_indexed"], ints(&[4, 0, 0, 0, 0, 0]));
}

#[test]
fn row_validation() {
    let p = plan();
    let mut missing = row(1, 2, 3, "x");
    missing.remove("Genres");
    let err = p.execute(&missing, RowMode::Strict).unwrap_err();
    assert!(matches!(err, RowError::Validation(_)), "{err}");

    let mut extra = row(1, 2, 3, "x");
    extra.insert("Rating".into(), Value::Int(5));
    assert!(matches!(p.execute(&extra, RowMode::Strict), Err(RowError::Validation(_))));
    assert!(p.execute(&extra, RowMode::Lenient).is_ok());

    let mut wrong = row(1, 2, 3, "x");
    wrong.insert("Genres".into(), Value::Int(3));
    assert!(matches!(p.execute(&wrong, RowMode::Strict), Err(RowError::Validation(_))));
}

#[test]
fn batch_reports_per_row() {
    let p = plan();
    assert!(p.execute_batch(&[], RowMode::Strict).is_empty());
    let mut bad = row(1, 2, 3, "x");
    bad.remove("UserID");
    let rows = [row(1, 7, 3, "Drama"), bad, row(2, 1, 0, "Comedy")];
    let results = p.execute_batch(&rows, RowMode::Strict);
    assert_eq!(results.len(), 3);
    assert!(results[0].is_ok() && results[1].is_err() && results[2].is_ok());
    assert_eq!(results[0].as_ref().unwrap(), &p.execute(&rows[0], RowMode::Strict).unwrap());
}

#[test]
fn execute_is_referentially_transparent_and_thread_safe() {
    let p = Arc::new(plan());
    let r = row(42, 3, 10, "Comedy|Drama|Action");
    let expected = p.execute(&r, RowMode::Strict).unwrap();
    assert_eq!(p.execute(&r, RowMode::Strict).unwrap(), expected);
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let (p, r) = (Arc::clone(&p), r.clone());
            std::thread::spawn(move || (0..200).map(|_| p.execute(&r, RowMode::Strict).unwrap()).collect::<Vec<_>>())
        })
        .collect();
    for h in handles {
        assert!(h.join().unwrap().iter().all(|o| *o == expected));
    }
}

#[test]
fn json_rows() {
    let p = plan();
    let out = p
        .execute_json(&json!({"UserID": 42, "MovieID": 7, "Occupation": 3, "Genres": "Action|Comedy"}), RowMode::Strict)
        .unwrap();
    assert_eq!(out["Genres_indexed"], json!([3, 2, 0, 0, 0, 0]));
    assert_eq!(out["Occupation_indexed"], json!([1.0, 0.0, 0.0]));
    assert!(p.execute_json(&json!([1, 2]), RowMode::Strict).is_err());
}

#[test]
fn bad_documents() {
    assert!(matches!(
        ExecutablePlan::load_str(&BUNDLE[..BUNDLE.len() / 3]),
        Err(ManifestError::Parse(_))
    ));
    let v99 = BUNDLE.replacen("\"formatVersion\": 1", "\"formatVersion\": 99", 1);
    let err = ExecutablePlan::load_str(&v99).unwrap_err();
    assert!(err.to_string().contains("unsupported version"), "{err}");
    let unknown = BUNDLE.replacen("\"string_to_list\"", "\"string_to_tree\"", 1);
    assert!(ExecutablePlan::load_str(&unknown).is_err());
    let dup = BUNDLE.replacen("\"Drama\"", "\"Action\"", 1);
    assert!(matches!(
        ExecutablePlan::load_str(&dup),
        Err(ManifestError::Validation(_) | ManifestError::InvalidState { .. })
    ));
}
