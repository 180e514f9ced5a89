//! Random single-stage pipelines for every op kind.

use std::collections::BTreeMap;

use featherpipe_core::OpKind;
use featherpipe_engine::PipelineSpec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value as Json};

use crate::check::{check_parity_with, ParityReport};
use crate::corpus::{generate_corpus, CorpusSpec, Hint};

/// A generated pipeline plus the corpus bounds that exercise it.
#[derive(Debug, Clone)]
pub struct SweepCase {
    pub kind: OpKind,
    pub spec: PipelineSpec,
    pub corpus: CorpusSpec,
}

impl SweepCase {
    /// Fits on the case corpus, then compares backends on a fresh corpus
    /// drawn with a different seed, so unseen categories occur.
    pub fn run(&self) -> ParityReport {
        let fit_data = generate_corpus(&self.corpus, &self.spec.inputs);
        let eval = CorpusSpec {
            seed: self.corpus.seed.wrapping_add(0x9e37_79b9),
            ..self.corpus.clone()
        };
        let eval_data = generate_corpus(&eval, &self.spec.inputs);
        check_parity_with(&self.spec, &fit_data, &eval_data, None)
    }
}

const WORD_TOKENS: [&str; 2] = ["PADDED", "<pad>"];

struct Builder {
    rng: ChaCha8Rng,
    inputs: Vec<Json>,
    hints: BTreeMap<String, Hint>,
}

impl Builder {
    fn input(&mut self, dtype: &str, shape: &[usize], hint: Hint) -> String {
        let name = format!("c{}", self.inputs.len());
        self.inputs.push(json!({"name": name, "dtype": dtype, "shape": shape}));
        self.hints.insert(name.clone(), hint);
        name
    }

    fn shape(&mut self, max_rank: usize) -> Vec<usize> {
        let rank = self.rng.gen_range(0..=max_rank);
        (0..rank).map(|_| self.rng.gen_range(1..=4)).collect()
    }

    /// The full shape or a scalar, for broadcast partners.
    fn partner(&mut self, shape: &[usize]) -> Vec<usize> {
        if self.rng.gen_bool(0.5) {
            shape.to_vec()
        } else {
            Vec::new()
        }
    }

    fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs.choose(&mut self.rng).expect("non-empty").clone()
    }

    fn coin(&mut self) -> bool {
        self.rng.gen()
    }

    fn vocab_params(&mut self, params: &mut Map<String, Json>) {
        let order = self.pick(&["frequencyDesc", "frequencyAsc", "alphabeticalAsc", "alphabeticalDesc"]);
        params.insert("stringOrderType".into(), json!(order));
        params.insert("numOOVIndices".into(), json!(self.rng.gen_range(1..=3)));
        if self.coin() {
            params.insert("maskToken".into(), json!("PADDED"));
        }
    }

    /// A string-ish categorical input: strings, or ints through `inputDtype`.
    fn categorical(&mut self, max_rank: usize, params: &mut Map<String, Json>) -> String {
        let shape = self.shape(max_rank);
        if self.rng.gen_bool(0.25) {
            params.insert("inputDtype".into(), json!("string"));
            self.input("int64", &shape, Hint::IntRange(-20, 40))
        } else {
            self.input("string", &shape, Hint::Words)
        }
    }
}

fn numeric_dtype(b: &mut Builder) -> &'static str {
    b.pick(&["float64", "float64", "int64"])
}

fn constant_for(b: &mut Builder, dtype: &str) -> Json {
    match dtype {
        "int64" => json!(b.rng.gen_range(-5..=5)),
        "float64" => json!(b.pick(&[0.0, 0.5, -2.5, 100.0])),
        "bool" => json!(b.coin()),
        _ => json!(b.pick(&["a", "Comedy", "PADDED", ""])),
    }
}

fn stage(kind: OpKind, inputs: Vec<String>, outputs: Vec<String>, params: Map<String, Json>) -> Json {
    json!({"name": "stage", "op": kind.name(), "inputs": inputs, "outputs": outputs, "params": params})
}

fn out() -> Vec<String> {
    vec!["out".into()]
}

/// One random single-stage pipeline of `kind`.
pub fn random_case(kind: OpKind, seed: u64) -> SweepCase {
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(seed ^ ((kind as u64) << 32)),
        inputs: Vec::new(),
        hints: BTreeMap::new(),
    };
    let mut p = Map::new();
    let st = match kind {
        OpKind::HashIndex => {
            let c = b.categorical(2, &mut p);
            p.insert("numBins".into(), json!(b.pick(&[1u32, 7, 1000, 100_000, 2_147_483_647])));
            if b.coin() {
                p.insert("maskToken".into(), json!("PADDED"));
            }
            stage(kind, vec![c], out(), p)
        }
        OpKind::BloomEncode => {
            let c = b.categorical(1, &mut p);
            p.insert("numBins".into(), json!(b.rng.gen_range(1..5000)));
            p.insert("numHashes".into(), json!(b.rng.gen_range(1..=4)));
            stage(kind, vec![c], out(), p)
        }
        OpKind::LogTransform => {
            let shape = b.shape(2);
            let dtype = numeric_dtype(&mut b);
            let hint = if b.rng.gen_bool(0.7) { Hint::FloatRange(0.0, 1e6) } else { Hint::Mixed };
            let hint = if dtype == "int64" && hint != Hint::Mixed { Hint::IntRange(0, 10_000) } else { hint };
            let c = b.input(dtype, &shape, hint);
            p.insert("alpha".into(), json!(b.pick(&[0.0, 0.5, 1.0, 10.0])));
            stage(kind, vec![c], out(), p)
        }
        OpKind::Arithmetic => {
            let op = b.pick(&["add", "sub", "mul", "div", "pow", "min", "max"]);
            p.insert("kind".into(), json!(op));
            let shape = b.shape(2);
            let d0 = numeric_dtype(&mut b);
            let a = b.input(d0, &shape, Hint::Mixed);
            if b.coin() {
                p.insert("constant".into(), json!(b.pick(&[0.0, 1.0, -2.5, 3.0, 1e6])));
                stage(kind, vec![a], out(), p)
            } else {
                let other = b.partner(&shape);
                let d1 = b.pick(&["float64", "int64", "bool"]);
                let c = b.input(d1, &other, Hint::Mixed);
                let inputs = if b.coin() { vec![a, c] } else { vec![c, a] };
                stage(kind, inputs, out(), p)
            }
        }
        OpKind::StringToList => {
            let sep = b.pick(&["|", ",", "::", " "]);
            let shape = b.shape(1);
            let c = b.input("string", &shape, Hint::Joined(sep.to_string()));
            p.insert("separator".into(), json!(sep));
            p.insert("listLength".into(), json!(b.rng.gen_range(1..=8)));
            p.insert("defaultValue".into(), json!(b.pick(&["PADDED", "", "<pad>"])));
            stage(kind, vec![c], out(), p)
        }
        OpKind::RegexExtract => {
            let (pattern, group) = b.pick(&[
                ("(\\d+)", 1),
                ("^([a-z]+)-(\\d+)$", 2),
                ("[aeiou]+", 0),
                ("^u(\\d)", 1),
                ("(?i)comedy|drama", 0),
            ]);
            let shape = b.shape(2);
            let hint = b.pick(&[Hint::Words, Hint::Mixed]);
            let c = b.input("string", &shape, hint);
            p.insert("pattern".into(), json!(pattern));
            p.insert("groupIndex".into(), json!(group));
            p.insert("defaultValue".into(), json!(b.pick(&["", "NONE"])));
            stage(kind, vec![c], out(), p)
        }
        OpKind::StringCase => {
            let shape = b.shape(2);
            let c = b.input("string", &shape, Hint::Words);
            p.insert("kind".into(), json!(b.pick(&["upper", "lower"])));
            stage(kind, vec![c], out(), p)
        }
        OpKind::StringConcat => {
            let shape = b.shape(2);
            let n = b.rng.gen_range(1..=3);
            let inputs = (0..n)
                .map(|i| {
                    let s = if i == 0 { shape.clone() } else { b.partner(&shape) };
                    let d = b.pick(&["string", "string", "int64", "float64", "bool"]);
                    b.input(d, &s, Hint::Mixed)
                })
                .collect();
            p.insert("separator".into(), json!(b.pick(&["", "_", " | "])));
            let k = b.rng.gen_range(0..=2);
            let constants: Vec<String> = (0..k).map(|i| format!("k{i}")).collect();
            p.insert("constants".into(), json!(constants));
            stage(kind, inputs, out(), p)
        }
        OpKind::DateDecompose => {
            let shape = b.shape(2);
            let c = b.input("string", &shape, Hint::Date);
            p.insert("part".into(), json!(b.pick(&["year", "month", "dayOfMonth", "weekday", "dayOfYear"])));
            stage(kind, vec![c], out(), p)
        }
        OpKind::DateDiffDays => {
            let shape = b.shape(2);
            let a = b.input("string", &shape, Hint::Date);
            let other = b.partner(&shape);
            let c = b.input("string", &other, Hint::Date);
            let inputs = if b.coin() { vec![a, c] } else { vec![c, a] };
            stage(kind, inputs, out(), p)
        }
        OpKind::HaversineKm => {
            let shape = b.shape(2);
            let wild = b.rng.gen_bool(0.2);
            let inputs = (0..4)
                .map(|i| {
                    let s = if i == 0 { shape.clone() } else { b.partner(&shape) };
                    let hint = match (wild, i % 2) {
                        (true, _) => Hint::FloatRange(-200.0, 200.0),
                        (false, 0) => Hint::Latitude,
                        (false, _) => Hint::Longitude,
                    };
                    b.input("float64", &s, hint)
                })
                .collect();
            stage(kind, inputs, out(), p)
        }
        OpKind::Logical => {
            let op = b.pick(&["and", "or", "not", "xor"]);
            p.insert("kind".into(), json!(op));
            let shape = b.shape(2);
            let a = b.input("bool", &shape, Hint::Mixed);
            let mut inputs = vec![a];
            if op != "not" {
                let other = b.partner(&shape);
                inputs.push(b.input("bool", &other, Hint::Mixed));
                if b.coin() {
                    inputs.reverse();
                }
            }
            stage(kind, inputs, out(), p)
        }
        OpKind::Compare => {
            p.insert("kind".into(), json!(b.pick(&["eq", "ne", "lt", "le", "gt", "ge"])));
            let shape = b.shape(2);
            let d = b.pick(&["int64", "float64", "string", "bool"]);
            let hint = if d == "string" { Hint::Words } else { Hint::IntRange(-3, 3) };
            let a = b.input(d, &shape, hint.clone());
            if b.coin() {
                let c = constant_for(&mut b, d);
                p.insert("constant".into(), c);
                stage(kind, vec![a], out(), p)
            } else {
                let other = b.partner(&shape);
                let c = b.input(d, &other, hint);
                stage(kind, vec![a, c], out(), p)
            }
        }
        OpKind::ConditionalSelect => {
            let shape = b.shape(2);
            let cond = b.input("bool", &shape, Hint::Mixed);
            let d = b.pick(&["int64", "float64", "string", "bool"]);
            let mut inputs = vec![cond];
            let branch_shape = b.partner(&shape);
            for key in ["ifTrue", "ifFalse"] {
                if b.coin() {
                    let c = constant_for(&mut b, d);
                    p.insert(key.into(), c);
                } else {
                    inputs.push(b.input(d, &branch_shape, Hint::Mixed));
                }
            }
            stage(kind, inputs, out(), p)
        }
        OpKind::ArrayAssemble => {
            let shape = b.shape(1);
            let d = b.pick(&["int64", "float64", "string", "bool"]);
            let n = b.rng.gen_range(1..=4);
            let inputs = (0..n).map(|_| b.input(d, &shape, Hint::Mixed)).collect();
            stage(kind, inputs, out(), p)
        }
        OpKind::ArrayDisassemble => {
            let k = b.rng.gen_range(1..=4);
            let mut shape = vec![k];
            if b.coin() {
                shape.push(b.rng.gen_range(1..=3));
            }
            let d = b.pick(&["int64", "float64", "string", "bool"]);
            let c = b.input(d, &shape, Hint::Mixed);
            let outputs = (0..k).map(|i| format!("out{i}")).collect();
            stage(kind, vec![c], outputs, p)
        }
        OpKind::ArraySlice => {
            let n = b.rng.gen_range(1..=6);
            let mut shape = vec![n];
            if b.coin() {
                shape.insert(0, b.rng.gen_range(1..=3));
            }
            let d = b.pick(&["int64", "float64", "string", "bool"]);
            let c = b.input(d, &shape, Hint::Mixed);
            let start = b.rng.gen_range(0..n);
            p.insert("start".into(), json!(start));
            p.insert("length".into(), json!(b.rng.gen_range(1..=n - start)));
            stage(kind, vec![c], out(), p)
        }
        OpKind::ListAggregate => {
            let mut shape = vec![b.rng.gen_range(1..=5)];
            if b.coin() {
                shape.insert(0, b.rng.gen_range(1..=3));
            }
            let d = numeric_dtype(&mut b);
            let hint = b.pick(&[Hint::Mixed, Hint::IntRange(-2, 2)]);
            let c = b.input(d, &shape, hint);
            p.insert("kind".into(), json!(b.pick(&["sum", "mean", "min", "max"])));
            if b.rng.gen_bool(0.3) {
                p.insert("maskValue".into(), json!(b.pick(&[0.0, -1.0])));
            }
            stage(kind, vec![c], out(), p)
        }
        OpKind::Cast => {
            let (from, to, hint) = b.pick(&[
                ("int64", "float64", Hint::Mixed),
                ("int64", "string", Hint::Mixed),
                ("float64", "int64", Hint::Integral),
                ("float64", "int64", Hint::Mixed),
                ("float64", "string", Hint::Mixed),
                ("bool", "int64", Hint::Mixed),
                ("bool", "float64", Hint::Mixed),
                ("bool", "string", Hint::Mixed),
                ("string", "int64", Hint::NumericText),
                ("string", "float64", Hint::NumericText),
                ("string", "bool", Hint::BoolText),
                ("int64", "int64", Hint::Mixed),
            ]);
            let shape = b.shape(2);
            let c = b.input(from, &shape, hint);
            p.insert("dtype".into(), json!(to));
            stage(kind, vec![c], out(), p)
        }
        OpKind::StringIndex => {
            b.vocab_params(&mut p);
            let c = b.categorical(2, &mut p);
            stage(kind, vec![c], out(), p)
        }
        OpKind::SharedStringIndex => {
            b.vocab_params(&mut p);
            let n = b.rng.gen_range(2..=3);
            let inputs = (0..n)
                .map(|_| {
                    let shape = b.shape(2);
                    b.input("string", &shape, Hint::Words)
                })
                .collect();
            let outputs = (0..n).map(|i| format!("out{i}")).collect();
            stage(kind, inputs, outputs, p)
        }
        OpKind::OneHotEncode => {
            b.vocab_params(&mut p);
            p.insert("dropUnseen".into(), json!(b.coin()));
            let c = b.categorical(1, &mut p);
            stage(kind, vec![c], out(), p)
        }
        OpKind::StandardScale => {
            let shape = b.shape(1);
            let d = numeric_dtype(&mut b);
            let c = b.input(d, &shape, Hint::Mixed);
            stage(kind, vec![c], out(), p)
        }
        OpKind::Impute => {
            let shape = b.shape(2);
            let d = numeric_dtype(&mut b);
            let hint = b.pick(&[Hint::Mixed, Hint::IntRange(-2, 5)]);
            let c = b.input(d, &shape, hint);
            p.insert("strategy".into(), json!(b.pick(&["mean", "median"])));
            if b.rng.gen_bool(0.4) {
                p.insert("sentinel".into(), json!(b.pick(&[-1.0, 0.0])));
            }
            stage(kind, vec![c], out(), p)
        }
    };
    let doc = json!({"version": 1, "inputs": b.inputs, "stages": [st]});
    let spec = PipelineSpec::parse(&doc.to_string())
        .unwrap_or_else(|e| panic!("generated {kind} spec is invalid: {e}\n{doc:#}"));
    let mut corpus = CorpusSpec::for_spec(&spec, seed, 1000);
    for t in WORD_TOKENS {
        if !corpus.tokens.iter().any(|x| x == t) {
            corpus.tokens.push(t.to_string());
        }
    }
    corpus.hints = b.hints;
    SweepCase { kind, spec, corpus }
}

/// `count` random cases per op kind, each over `rows` rows.
pub fn sweep_cases(count: usize, rows: usize, seed: u64) -> Vec<SweepCase> {
    OpKind::ALL
        .iter()
        .flat_map(|&kind| {
            (0..count).map(move |i| {
                let mut case = random_case(kind, seed.wrapping_add(i as u64));
                case.corpus.n_rows = rows;
                case
            })
        })
        .collect()
}

/// Runs every case in parallel; results follow case order.
pub fn run_sweep(cases: &[SweepCase]) -> Vec<ParityReport> {
    cases.par_iter().map(SweepCase::run).collect()
}
