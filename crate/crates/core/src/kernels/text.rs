use regex::Regex;
use serde::{Deserialize, Serialize};

/// Splits on a literal separator, keeps the first `len` parts and right-pads
/// with `default`.
pub fn split_pad(s: &str, separator: &str, len: usize, default: &str) -> Vec<String> {
    let mut parts: Vec<String> = s.split(separator).take(len).map(str::to_string).collect();
    parts.resize(len, default.to_string());
    parts
}

/// Capture-group extraction with a fallback for no match or an unmatched
/// group.
#[derive(Debug, Clone)]
pub struct RegexExtractor {
    re: Regex,
    group: usize,
    default: String,
}

impl RegexExtractor {
    pub fn new(pattern: &str, group: usize, default: &str) -> Result<Self, regex::Error> {
        Ok(RegexExtractor {
            re: Regex::new(pattern)?,
            group,
            default: default.to_string(),
        })
    }

    pub fn extract<'a>(&'a self, s: &'a str) -> &'a str {
        self.re
            .captures(s)
            .and_then(|caps| caps.get(self.group))
            .map_or(self.default.as_str(), |m| m.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CaseKind {
    Upper,
    Lower,
}

impl CaseKind {
    pub fn apply(self, s: &str) -> String {
        match self {
            CaseKind::Upper => s.to_uppercase(),
            CaseKind::Lower => s.to_lowercase(),
        }
    }
}
