//! A 60-stage ranking-style pipeline: date parts and gaps, log transforms,
//! assemble → scale → disassemble blocks and categorical indexing.

use featherpipe_engine::PipelineSpec;
use serde_json::{json, Value as Json};

use crate::corpus::{CorpusSpec, Hint};

struct Stages(Vec<Json>);

impl Stages {
    fn add(&mut self, op: &str, inputs: &[&str], outputs: &[&str], params: Json) {
        let name = format!("s{:02}_{}", self.0.len() + 1, outputs[0]);
        self.0.push(json!({"name": name, "op": op, "inputs": inputs, "outputs": outputs, "params": params}));
    }
}

/// The pipeline spec.
pub fn ltr_spec() -> PipelineSpec {
    let inputs = json!([
        {"name": "search_date", "dtype": "string", "shape": []},
        {"name": "checkin_date", "dtype": "string", "shape": []},
        {"name": "checkout_date", "dtype": "string", "shape": []},
        {"name": "price", "dtype": "float64", "shape": []},
        {"name": "rating", "dtype": "float64", "shape": []},
        {"name": "num_reviews", "dtype": "int64", "shape": []},
        {"name": "star", "dtype": "int64", "shape": []},
        {"name": "user_lat", "dtype": "float64", "shape": []},
        {"name": "user_lon", "dtype": "float64", "shape": []},
        {"name": "hotel_lat", "dtype": "float64", "shape": []},
        {"name": "hotel_lon", "dtype": "float64", "shape": []},
        {"name": "city", "dtype": "string", "shape": []},
        {"name": "country", "dtype": "string", "shape": []},
        {"name": "brand", "dtype": "string", "shape": []},
        {"name": "device", "dtype": "string", "shape": []},
        {"name": "amenities", "dtype": "string", "shape": []},
        {"name": "is_refundable", "dtype": "bool", "shape": []},
        {"name": "has_breakfast", "dtype": "bool", "shape": []},
        {"name": "pos", "dtype": "float64", "shape": [4]}
    ]);
    let mut s = Stages(Vec::new());
    for part in ["year", "month", "dayOfMonth", "weekday", "dayOfYear"] {
        let out = format!("search_{part}");
        s.add("date_decompose", &["search_date"], &[&out], json!({"part": part}));
    }
    for part in ["month", "weekday", "dayOfYear"] {
        let out = format!("checkin_{part}");
        s.add("date_decompose", &["checkin_date"], &[&out], json!({"part": part}));
    }
    s.add("date_diff_days", &["checkin_date", "search_date"], &["lead_days"], json!({}));
    s.add("date_diff_days", &["checkout_date", "checkin_date"], &["stay_days"], json!({}));
    s.add("cast", &["lead_days"], &["lead_days_f"], json!({"dtype": "float64"}));
    s.add("arithmetic", &["lead_days_f"], &["lead_clamped"], json!({"kind": "max", "constant": 0.0}));
    s.add("log_transform", &["lead_clamped"], &["log_lead"], json!({"alpha": 1.0}));
    s.add("arithmetic", &["stay_days"], &["stay_clamped"], json!({"kind": "max", "constant": 0.0}));
    s.add("log_transform", &["stay_clamped"], &["log_stay"], json!({"alpha": 1.0}));
    s.add("log_transform", &["price"], &["log_price"], json!({"alpha": 1.0}));
    s.add("arithmetic", &["stay_clamped"], &["nights"], json!({"kind": "add", "constant": 1.0}));
    s.add("arithmetic", &["price", "nights"], &["price_per_night"], json!({"kind": "div"}));
    s.add("log_transform", &["price_per_night"], &["log_ppn"], json!({"alpha": 1.0}));
    s.add("impute", &["rating"], &["rating_mean"], json!({"strategy": "mean"}));
    s.add("log_transform", &["num_reviews"], &["log_reviews"], json!({"alpha": 1.0}));
    s.add("haversine_km", &["user_lat", "user_lon", "hotel_lat", "hotel_lon"], &["distance_km"], json!({}));
    s.add("log_transform", &["distance_km"], &["log_distance"], json!({"alpha": 1.0}));
    s.add(
        "array_assemble",
        &["log_price", "log_ppn", "rating_mean", "log_reviews", "log_distance", "log_lead"],
        &["numeric_vec"],
        json!({}),
    );
    s.add("standard_scale", &["numeric_vec"], &["numeric_scaled"], json!({}));
    s.add(
        "array_disassemble",
        &["numeric_scaled"],
        &["z_price", "z_ppn", "z_rating", "z_reviews", "z_distance", "z_lead"],
        json!({}),
    );
    let vocab = json!({"stringOrderType": "frequencyDesc", "numOOVIndices": 1});
    s.add("string_index", &["city"], &["city_index"], vocab.clone());
    s.add("string_index", &["country"], &["country_index"], json!({"stringOrderType": "alphabeticalAsc", "numOOVIndices": 2}));
    s.add("hash_index", &["brand"], &["brand_hash"], json!({"numBins": 1000}));
    s.add("one_hot_encode", &["device"], &["device_onehot"], json!({"dropUnseen": true}));
    s.add(
        "string_to_list",
        &["amenities"],
        &["amenity_list"],
        json!({"separator": "|", "listLength": 5, "defaultValue": "PADDED"}),
    );
    s.add(
        "string_index",
        &["amenity_list"],
        &["amenity_index"],
        json!({"stringOrderType": "frequencyDesc", "numOOVIndices": 1, "maskToken": "PADDED"}),
    );
    s.add("string_concat", &["city", "country"], &["city_country"], json!({"separator": "_"}));
    s.add("hash_index", &["city_country"], &["city_country_hash"], json!({"numBins": 5000}));
    s.add("bloom_encode", &["city"], &["city_bloom"], json!({"numBins": 2000, "numHashes": 3}));
    s.add(
        "one_hot_encode",
        &["star"],
        &["star_onehot"],
        json!({"inputDtype": "string", "dropUnseen": false, "stringOrderType": "alphabeticalAsc"}),
    );
    s.add("shared_string_index", &["city", "brand"], &["city_shared", "brand_shared"], vocab.clone());
    s.add("compare", &["price"], &["is_expensive"], json!({"kind": "gt", "constant": 200.0}));
    s.add("logical", &["is_refundable", "has_breakfast"], &["flexible_board"], json!({"kind": "and"}));
    s.add("logical", &["is_expensive", "flexible_board"], &["premium"], json!({"kind": "or"}));
    s.add("conditional_select", &["premium"], &["premium_f"], json!({"ifTrue": 1.0, "ifFalse": 0.0}));
    s.add("compare", &["star"], &["high_star"], json!({"kind": "ge", "constant": 4}));
    s.add("conditional_select", &["high_star", "log_price"], &["star_price"], json!({"ifFalse": 0.0}));
    s.add("compare", &["search_weekday"], &["weekend_search"], json!({"kind": "ge", "constant": 6}));
    s.add("cast", &["weekend_search"], &["weekend_search_f"], json!({"dtype": "float64"}));
    s.add("string_case", &["brand"], &["brand_lower"], json!({"kind": "lower"}));
    s.add("regex_extract", &["amenities"], &["first_amenity"], json!({"pattern": "^([^|]+)", "groupIndex": 1, "defaultValue": "none"}));
    s.add("string_index", &["first_amenity"], &["first_amenity_index"], vocab);
    s.add("list_aggregate", &["amenity_index"], &["amenity_max"], json!({"kind": "max"}));
    s.add("array_slice", &["amenity_list"], &["top_amenities"], json!({"start": 0, "length": 2}));
    s.add("hash_index", &["top_amenities"], &["top_amenity_hash"], json!({"numBins": 100, "maskToken": "PADDED"}));
    s.add("impute", &["rating"], &["rating_median"], json!({"strategy": "median"}));
    s.add("arithmetic", &["rating_median", "rating_mean"], &["rating_gap"], json!({"kind": "sub"}));
    s.add("impute", &["pos"], &["pos_filled"], json!({"strategy": "mean"}));
    s.add("standard_scale", &["pos_filled"], &["pos_scaled"], json!({}));
    s.add("list_aggregate", &["pos_scaled"], &["pos_mean"], json!({"kind": "mean"}));
    s.add("array_disassemble", &["pos_scaled"], &["pos0", "pos1", "pos2", "pos3"], json!({}));
    s.add("arithmetic", &["pos0", "pos1"], &["pos01"], json!({"kind": "mul"}));
    s.add("arithmetic", &["pos01"], &["pos01_sq"], json!({"kind": "pow", "constant": 2.0}));
    s.add("arithmetic", &["z_price", "z_rating"], &["price_x_rating"], json!({"kind": "mul"}));
    let doc = json!({"version": 1, "inputs": inputs, "stages": s.0});
    PipelineSpec::parse(&doc.to_string()).expect("the ranking pipeline is valid")
}

/// Corpus bounds for [`ltr_spec`].
pub fn ltr_corpus(seed: u64, n_rows: usize) -> CorpusSpec {
    let mut cs = CorpusSpec::for_spec(&ltr_spec(), seed, n_rows);
    cs.invalid_dates = 0.0;
    cs.partitions = 8;
    cs.alphabet = ["paris", "rome", "berlin", "lisbon", "oslo", "FR", "IT", "DE", "Hilton", "Ibis", "mobile", "desktop"]
        .map(String::from)
        .to_vec();
    cs.hint("search_date", Hint::Date)
        .hint("checkin_date", Hint::Date)
        .hint("checkout_date", Hint::Date)
        .hint("price", Hint::FloatRange(10.0, 900.0))
        .hint("rating", Hint::FloatRange(0.0, 5.0))
        .hint("num_reviews", Hint::IntRange(0, 5000))
        .hint("star", Hint::IntRange(1, 5))
        .hint("user_lat", Hint::Latitude)
        .hint("user_lon", Hint::Longitude)
        .hint("hotel_lat", Hint::Latitude)
        .hint("hotel_lon", Hint::Longitude)
        .hint("city", Hint::Words)
        .hint("country", Hint::Words)
        .hint("brand", Hint::Words)
        .hint("device", Hint::Words)
        .hint("amenities", Hint::Joined("|".into()))
        .hint("pos", Hint::FloatRange(-3.0, 3.0))
}
