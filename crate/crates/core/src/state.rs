//! Learned estimator state and its document encoding.

use serde_json::{Map, Value as Json};

use crate::json::{f64_from_json, f64_to_json};
use crate::ops::OpKind;

#[derive(Debug, Clone, PartialEq)]
pub enum FittedState {
    /// Ordered labels of a string indexer or one-hot encoder.
    Vocabulary { labels: Vec<String> },
    /// Per-position population mean and standard deviation.
    Moments { mean: Vec<f64>, std: Vec<f64> },
    /// Replacement for missing values.
    Impute { value: f64 },
}

impl FittedState {
    pub fn to_json(&self) -> Json {
        let mut map = Map::new();
        match self {
            FittedState::Vocabulary { labels } => {
                map.insert("labels".into(), Json::from(labels.clone()));
            }
            FittedState::Moments { mean, std } => {
                map.insert("mean".into(), mean.iter().copied().map(f64_to_json).collect());
                map.insert("std".into(), std.iter().copied().map(f64_to_json).collect());
            }
            FittedState::Impute { value } => {
                map.insert("imputeValue".into(), f64_to_json(*value));
            }
        }
        Json::Object(map)
    }

    /// Decodes the state of an op of `kind`.
    pub fn from_json(kind: OpKind, json: &Json) -> Result<FittedState, String> {
        let map = json.as_object().ok_or("state must be an object")?;
        let expect_keys = |keys: &[&str]| -> Result<(), String> {
            match map.keys().find(|k| !keys.contains(&k.as_str())) {
                Some(k) => Err(format!("unexpected state field `{k}`")),
                None => Ok(()),
            }
        };
        let field = |key: &str| map.get(key).ok_or_else(|| format!("state is missing `{key}`"));
        let floats = |key: &str| -> Result<Vec<f64>, String> {
            field(key)?
                .as_array()
                .ok_or_else(|| format!("`{key}` must be an array"))?
                .iter()
                .map(|x| f64_from_json(x).ok_or_else(|| format!("`{key}` holds a non-number {x}")))
                .collect()
        };
        match kind {
            OpKind::StringIndex | OpKind::SharedStringIndex | OpKind::OneHotEncode => {
                expect_keys(&["labels"])?;
                let labels = field("labels")?
                    .as_array()
                    .ok_or("`labels` must be an array")?
                    .iter()
                    .map(|x| x.as_str().map(str::to_string).ok_or_else(|| format!("label {x} is not a string")))
                    .collect::<Result<_, _>>()?;
                Ok(FittedState::Vocabulary { labels })
            }
            OpKind::StandardScale => {
                expect_keys(&["mean", "std"])?;
                let (mean, std) = (floats("mean")?, floats("std")?);
                if mean.len() != std.len() || mean.is_empty() {
                    return Err("`mean` and `std` must be non-empty and equally long".into());
                }
                Ok(FittedState::Moments { mean, std })
            }
            OpKind::Impute => {
                expect_keys(&["imputeValue"])?;
                let value = f64_from_json(field("imputeValue")?).ok_or("`imputeValue` must be a number")?;
                Ok(FittedState::Impute { value })
            }
            other => Err(format!("{other} carries no state")),
        }
    }

    /// One-line description for fit summaries.
    pub fn summary(&self) -> String {
        match self {
            FittedState::Vocabulary { labels } => format!("vocabulary of {} labels", labels.len()),
            FittedState::Moments { mean, std } => format!("moments over {} positions (mean {:?}, std {:?})", mean.len(), mean, std),
            FittedState::Impute { value } => format!("impute value {value}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let states = [
            (OpKind::StringIndex, FittedState::Vocabulary { labels: vec!["b".into(), "a".into()] }),
            (
                OpKind::StandardScale,
                FittedState::Moments { mean: vec![2.0, f64::NAN], std: vec![0.5, f64::INFINITY] },
            ),
            (OpKind::Impute, FittedState::Impute { value: 2.5 }),
        ];
        for (kind, state) in states {
            let back = FittedState::from_json(kind, &state.to_json()).unwrap();
            assert_eq!(format!("{back:?}"), format!("{state:?}"));
        }
    }

    #[test]
    fn rejects_mismatched_state() {
        let labels = FittedState::Vocabulary { labels: vec![] }.to_json();
        assert!(FittedState::from_json(OpKind::Impute, &labels).is_err());
        assert!(FittedState::from_json(OpKind::HashIndex, &labels).is_err());
        let bad = serde_json::json!({"mean": [1.0], "std": []});
        assert!(FittedState::from_json(OpKind::StandardScale, &bad).is_err());
    }

    #[test]
    fn floats_encode_shortest() {
        let s = FittedState::Moments { mean: vec![2.0, 0.1], std: vec![1e21, f64::NAN] };
        assert_eq!(
            serde_json::to_string(&s.to_json()).unwrap(),
            r#"{"mean":[2.0,0.1],"std":[1e+21,"NaN"]}"#
        );
    }
}
