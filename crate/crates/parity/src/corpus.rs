//! Seeded synthetic data for differential runs.

use std::collections::BTreeMap;

use featherpipe_core::ops::Op;
use featherpipe_core::{DType, FieldSpec, RecordBatch, Schema, Value};
use featherpipe_engine::PipelineSpec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What kind of values to draw for a column.
#[derive(Debug, Clone, PartialEq)]
pub enum Hint {
    /// Anything that fits the dtype, boundary values included.
    Mixed,
    /// Vocabulary-like strings: a small alphabet, a long tail and tokens.
    Words,
    /// `YYYY-MM-DD` dates, with `invalid_dates` of them malformed.
    Date,
    /// Words joined by a separator, between zero and `max_list_len + 2` parts.
    Joined(String),
    /// Numbers rendered as text, with a few unparseable strings.
    NumericText,
    /// `"true"` / `"false"` with a few other strings.
    BoolText,
    Latitude,
    Longitude,
    /// Floats uniformly drawn from `[lo, hi]`.
    FloatRange(f64, f64),
    /// Ints uniformly drawn from `[lo, hi]`.
    IntRange(i64, i64),
    /// Whole-number floats.
    Integral,
}

/// Bounds and seed for [`generate_corpus`]. The same spec always yields the
/// same batches.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub seed: u64,
    pub n_rows: usize,
    pub partitions: usize,
    pub null_prob: f64,
    pub max_list_len: usize,
    pub alphabet: Vec<String>,
    /// Mask and default tokens; each string leaf is a token with
    /// probability `token_prob`.
    pub tokens: Vec<String>,
    pub token_prob: f64,
    pub invalid_dates: f64,
    pub int_range: (i64, i64),
    pub float_range: (f64, f64),
    pub hints: BTreeMap<String, Hint>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            seed: 0,
            n_rows: 1000,
            partitions: 4,
            null_prob: 0.05,
            max_list_len: 6,
            alphabet: ["a", "b", "c", "Action", "Comedy", "Drama", "x-1", "ß", "日本", "Zebra"]
                .map(String::from)
                .to_vec(),
            tokens: Vec::new(),
            token_prob: 0.08,
            invalid_dates: 0.03,
            int_range: (-1000, 1000),
            float_range: (-1000.0, 1000.0),
            hints: BTreeMap::new(),
        }
    }
}

impl CorpusSpec {
    /// Defaults plus every mask and default token named by `spec`.
    pub fn for_spec(spec: &PipelineSpec, seed: u64, n_rows: usize) -> Self {
        let mut cs = CorpusSpec {
            seed,
            n_rows,
            ..CorpusSpec::default()
        };
        for s in &spec.stages {
            let token = match &s.op {
                Op::HashIndex(p) => p.mask_token.clone(),
                Op::StringToList(p) => Some(p.default_value.clone()),
                op => op.vocab_params().and_then(|v| v.mask_token),
            };
            if let Some(t) = token.filter(|t| !t.is_empty() && !cs.tokens.contains(t)) {
                cs.tokens.push(t);
            }
        }
        cs
    }

    pub fn hint(mut self, column: &str, hint: Hint) -> Self {
        self.hints.insert(column.to_string(), hint);
        self
    }
}

struct Gen<'a> {
    cs: &'a CorpusSpec,
    rng: ChaCha8Rng,
}

const INT_EDGES: [i64; 5] = [0, 1, -1, 1_000_000_000_000, -1_000_000_000_000];
const FLOAT_EDGES: [f64; 8] = [0.0, -0.0, 1.0, -1.0, 1e12, -1e12, 1e-12, 0.5];

impl Gen<'_> {
    fn chance(&mut self, p: f64) -> bool {
        p > 0.0 && self.rng.gen_bool(p.min(1.0))
    }

    fn word(&mut self) -> String {
        if !self.cs.tokens.is_empty() && self.chance(self.cs.token_prob) {
            return self.cs.tokens.choose(&mut self.rng).expect("non-empty").clone();
        }
        if self.chance(0.2) {
            return format!("u{}", self.rng.gen_range(0..500));
        }
        self.cs.alphabet.choose(&mut self.rng).cloned().unwrap_or_default()
    }

    fn date(&mut self) -> String {
        if self.chance(self.cs.invalid_dates) {
            return ["2021-02-30", "2021-13-01", "20210101", "", "tomorrow"]
                .choose(&mut self.rng)
                .expect("non-empty")
                .to_string();
        }
        let year = self.rng.gen_range(1990..=2030);
        let month = self.rng.gen_range(1..=12u32);
        let day = self.rng.gen_range(1..=28u32);
        let day = if self.chance(0.1) { day.max(29).min(days_in(year, month)) } else { day };
        format!("{year:04}-{month:02}-{day:02}")
    }

    fn string(&mut self, hint: &Hint) -> String {
        match hint {
            Hint::Words => self.word(),
            Hint::Date => self.date(),
            Hint::Joined(sep) => {
                let n = self.rng.gen_range(0..=self.cs.max_list_len + 2);
                (0..n).map(|_| self.word()).collect::<Vec<_>>().join(sep)
            }
            Hint::NumericText => match self.rng.gen_range(0..10) {
                0 => "abc".into(),
                1..=4 => self.rng.gen_range(-100i64..100).to_string(),
                _ => format!("{}", self.rng.gen_range(-100.0f64..100.0)),
            },
            Hint::BoolText => ["true", "false", "true", "false", "TRUE", ""]
                .choose(&mut self.rng)
                .expect("non-empty")
                .to_string(),
            _ => match self.rng.gen_range(0..20) {
                0 => String::new(),
                1 => self.date(),
                2 => self.rng.gen_range(-50i64..50).to_string(),
                3 => format!("{}|{}", self.word(), self.word()),
                _ => self.word(),
            },
        }
    }

    fn int(&mut self, hint: &Hint) -> i64 {
        match hint {
            Hint::IntRange(lo, hi) => self.rng.gen_range(*lo..=*hi),
            _ if self.chance(0.1) => *INT_EDGES.choose(&mut self.rng).expect("non-empty"),
            _ => self.rng.gen_range(self.cs.int_range.0..=self.cs.int_range.1),
        }
    }

    fn float(&mut self, hint: &Hint) -> f64 {
        match hint {
            Hint::Latitude => self.rng.gen_range(-90.0..=90.0),
            Hint::Longitude => self.rng.gen_range(-180.0..=180.0),
            Hint::FloatRange(lo, hi) => self.rng.gen_range(*lo..=*hi),
            Hint::Integral => self.rng.gen_range(-1000i64..=1000) as f64,
            Hint::IntRange(lo, hi) => self.rng.gen_range(*lo..=*hi) as f64,
            _ if self.chance(0.1) => *FLOAT_EDGES.choose(&mut self.rng).expect("non-empty"),
            _ => self.rng.gen_range(self.cs.float_range.0..=self.cs.float_range.1),
        }
    }

    fn scalar(&mut self, dtype: DType, hint: &Hint) -> Value {
        if self.chance(self.cs.null_prob) {
            return Value::Null;
        }
        match dtype {
            DType::Int64 => Value::Int(self.int(hint)),
            DType::Float64 => Value::Float(self.float(hint)),
            DType::Bool => Value::Bool(self.rng.gen()),
            DType::String => Value::Str(self.string(hint)),
        }
    }

    fn value(&mut self, dtype: DType, dims: &[usize], hint: &Hint) -> Value {
        match dims.split_first() {
            None => self.scalar(dtype, hint),
            Some((n, rest)) => {
                if self.chance(self.cs.null_prob) {
                    return Value::Null;
                }
                Value::List((0..*n).map(|_| self.value(dtype, rest, hint)).collect())
            }
        }
    }

    fn row(&mut self, fields: &[FieldSpec]) -> Vec<Value> {
        fields
            .iter()
            .map(|f| {
                let hint = self.cs.hints.get(&f.name).cloned().unwrap_or(Hint::Mixed);
                let dims = f.shape.fixed_dims().expect("input shapes are fixed");
                self.value(f.dtype, &dims, &hint)
            })
            .collect()
    }
}

fn days_in(year: i32, month: u32) -> u32 {
    match month {
        4 | 6 | 9 | 11 => 30,
        2 if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        2 => 28,
        _ => 31,
    }
}

/// Generates `cs.n_rows` rows for `schema`, split into `cs.partitions`
/// contiguous partitions.
pub fn generate_corpus(cs: &CorpusSpec, schema: &Schema) -> Vec<RecordBatch> {
    let mut gen = Gen {
        cs,
        rng: ChaCha8Rng::seed_from_u64(cs.seed),
    };
    let rows: Vec<Vec<Value>> = (0..cs.n_rows).map(|_| gen.row(schema.fields())).collect();
    RecordBatch::from_rows(schema.clone(), &rows)
        .expect("generated rows conform to the schema")
        .partition(cs.partitions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use featherpipe_core::ShapeSpec;

    fn schema() -> Schema {
        Schema::new(vec![
            FieldSpec::scalar("s", DType::String),
            FieldSpec::new("v", DType::Float64, ShapeSpec::nested(2, 3)),
            FieldSpec::scalar("i", DType::Int64),
        ])
        .unwrap()
    }

    #[test]
    fn same_seed_same_corpus() {
        let cs = CorpusSpec { seed: 7, ..CorpusSpec::default() };
        assert_eq!(generate_corpus(&cs, &schema()), generate_corpus(&cs, &schema()));
        let other = CorpusSpec { seed: 8, ..cs.clone() };
        assert_ne!(generate_corpus(&cs, &schema()), generate_corpus(&other, &schema()));
    }

    #[test]
    fn zero_rows() {
        let cs = CorpusSpec { n_rows: 0, ..CorpusSpec::default() };
        let parts = generate_corpus(&cs, &schema());
        assert_eq!(parts.len(), 4);
        assert!(parts.iter().all(|p| p.num_rows() == 0 && p.schema() == &schema()));
    }

    #[test]
    fn all_null() {
        let cs = CorpusSpec { null_prob: 1.0, n_rows: 50, ..CorpusSpec::default() };
        for p in generate_corpus(&cs, &schema()) {
            for r in p.rows() {
                assert!(r.iter().all(Value::is_null));
            }
        }
    }

    #[test]
    fn tokens_appear_often_enough() {
        let cs = CorpusSpec {
            tokens: vec!["PADDED".into()],
            n_rows: 4000,
            null_prob: 0.0,
            ..CorpusSpec::default()
        }
        .hint("s", Hint::Words);
        let parts = generate_corpus(&cs, &schema());
        let hits = parts
            .iter()
            .flat_map(|p| p.column("s").unwrap().values())
            .filter(|v| v.as_str() == Some("PADDED"))
            .count();
        assert!(hits as f64 / 4000.0 >= 0.05, "{hits}");
    }
}
