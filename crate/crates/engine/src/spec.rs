//! Pipeline spec documents: parsing, graph validation and ordering.

use std::collections::{BTreeSet, HashMap};

use featherpipe_core::doc::{schema_to_json, stage_from_json, stage_to_json};
use featherpipe_core::error::{ValidationError, ValidationKind};
use featherpipe_core::ops::{infer_chain, StageDef};
use featherpipe_core::schema::Schema;
use serde::Deserialize;
use serde_json::{Map, Value as Json};

use crate::error::EngineError;

pub const SPEC_VERSION: u64 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    version: u64,
    inputs: Schema,
    stages: Vec<Json>,
}

/// A declared input schema plus stages in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSpec {
    pub inputs: Schema,
    pub stages: Vec<StageDef>,
}

impl PipelineSpec {
    /// Parses and validates a spec document.
    pub fn parse(text: &str) -> Result<Self, EngineError> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| EngineError::SpecParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if raw.version != SPEC_VERSION {
            return Err(EngineError::SpecParse {
                line: 1,
                column: 1,
                message: format!("unsupported version {} (expected {SPEC_VERSION})", raw.version),
            });
        }
        raw.inputs.require_fixed()?;
        let stages = raw
            .stages
            .iter()
            .enumerate()
            .map(|(i, s)| stage_from_json(s, i, &[]))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(raw.inputs, stages)
    }

    /// Builds a spec, checking names, wiring, acyclicity and stage types.
    pub fn new(inputs: Schema, stages: Vec<StageDef>) -> Result<Self, EngineError> {
        let spec = PipelineSpec { inputs, stages };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), EngineError> {
        let invalid = |stage: &str, kind, message: String| EngineError::Validation(ValidationError::new(stage, kind, message));
        let mut names = BTreeSet::new();
        let mut producers: HashMap<&str, &str> = HashMap::new();
        for s in &self.stages {
            if !names.insert(s.name.as_str()) {
                return Err(invalid(&s.name, ValidationKind::InvalidParams, format!("duplicate stage name `{}`", s.name)));
            }
            for out in &s.outputs {
                if self.inputs.contains(out) {
                    return Err(invalid(
                        &s.name,
                        ValidationKind::InvalidParams,
                        format!("output `{out}` shadows a pipeline input"),
                    ));
                }
                if let Some(other) = producers.insert(out, &s.name) {
                    return Err(invalid(
                        &s.name,
                        ValidationKind::InvalidParams,
                        format!("column `{out}` is also produced by stage `{other}`"),
                    ));
                }
            }
        }
        for s in &self.stages {
            if let Some(c) = s.inputs.iter().find(|c| !self.inputs.contains(c) && !producers.contains_key(c.as_str())) {
                return Err(invalid(&s.name, ValidationKind::UnknownColumn, format!("unknown column `{c}`")));
            }
        }
        let order = self.topo_order()?;
        infer_chain(&self.inputs, order.iter().map(|&i| (&self.stages[i], None)))?;
        Ok(())
    }

    /// Stage indices with producers before consumers; ready stages go in
    /// declaration order.
    pub fn topo_order(&self) -> Result<Vec<usize>, EngineError> {
        let producer: HashMap<&str, usize> = self
            .stages
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.outputs.iter().map(move |o| (o.as_str(), i)))
            .collect();
        let n = self.stages.len();
        let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, s) in self.stages.iter().enumerate() {
            for c in &s.inputs {
                if let Some(&p) = producer.get(c.as_str()) {
                    if deps[i].insert(p) {
                        users[p].push(i);
                    }
                }
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| deps[i].is_empty()).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &u in &users[i] {
                deps[u].remove(&i);
                if deps[u].is_empty() {
                    ready.insert(u);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|i| !order.contains(i)).expect("some stage is unordered");
            return Err(EngineError::Cycle {
                stage: self.stages[stuck].name.clone(),
            });
        }
        Ok(order)
    }

    pub fn to_json(&self) -> Json {
        let mut doc = Map::new();
        doc.insert("version".into(), Json::from(SPEC_VERSION));
        doc.insert("inputs".into(), schema_to_json(&self.inputs));
        doc.insert(
            "stages".into(),
            Json::Array(self.stages.iter().map(|s| Json::Object(stage_to_json(s))).collect()),
        );
        Json::Object(doc)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("spec serializes");
        s.push('\n');
        s
    }
}
