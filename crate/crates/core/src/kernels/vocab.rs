//! Index layout for fitted vocabularies.
//!
//! With a mask token: mask -> 0, OOV slots `1..=num_oov`, labels from
//! `num_oov + 1`. Without: OOV slots `0..num_oov`, labels from `num_oov`.
//! Unseen strings pick an OOV slot by hashing.

use std::collections::HashMap;

use crate::hash::{bucket, HASH_SEED};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VocabError {
    #[error("numOOVIndices must be at least 1")]
    NoOovSlots,
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("mask token `{0}` appears among the labels")]
    MaskInLabels(String),
}

#[derive(Debug, Clone)]
pub struct VocabIndex {
    lookup: HashMap<String, usize>,
    num_oov: u32,
    mask: Option<String>,
    num_labels: usize,
}

impl VocabIndex {
    pub fn new(labels: &[String], num_oov: u32, mask: Option<&str>) -> Result<Self, VocabError> {
        if num_oov == 0 {
            return Err(VocabError::NoOovSlots);
        }
        let mut lookup = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if mask == Some(label.as_str()) {
                return Err(VocabError::MaskInLabels(label.clone()));
            }
            if lookup.insert(label.clone(), i).is_some() {
                return Err(VocabError::DuplicateLabel(label.clone()));
            }
        }
        Ok(VocabIndex {
            lookup,
            num_oov,
            mask: mask.map(str::to_string),
            num_labels: labels.len(),
        })
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn num_oov(&self) -> u32 {
        self.num_oov
    }

    fn oov_offset(&self) -> i64 {
        i64::from(self.mask.is_some())
    }

    fn label_offset(&self) -> i64 {
        self.oov_offset() + i64::from(self.num_oov)
    }

    /// Largest index this layout can produce.
    pub fn max_index(&self) -> i64 {
        self.label_offset() + self.num_labels as i64 - 1
    }

    pub fn is_mask(&self, s: &str) -> bool {
        self.mask.as_deref() == Some(s)
    }

    fn oov_slot(&self, s: &str) -> u32 {
        bucket(s, HASH_SEED, self.num_oov)
    }

    pub fn index(&self, s: &str) -> i64 {
        if self.is_mask(s) {
            return 0;
        }
        match self.lookup.get(s) {
            Some(&pos) => self.label_offset() + pos as i64,
            None => self.oov_offset() + i64::from(self.oov_slot(s)),
        }
    }

    pub fn one_hot_width(&self, drop_unseen: bool) -> usize {
        if drop_unseen {
            self.num_labels
        } else {
            self.num_oov as usize + self.num_labels
        }
    }

    /// Hot position in the one-hot vector, `None` for an all-zero vector.
    pub fn one_hot_position(&self, s: &str, drop_unseen: bool) -> Option<usize> {
        if self.is_mask(s) {
            return None;
        }
        let oov = self.num_oov as usize;
        match (self.lookup.get(s), drop_unseen) {
            (Some(&pos), true) => Some(pos),
            (Some(&pos), false) => Some(oov + pos),
            (None, true) => None,
            (None, false) => Some(self.oov_slot(s) as usize),
        }
    }

    pub fn one_hot(&self, s: &str, drop_unseen: bool) -> Vec<f64> {
        let mut out = vec![0.0; self.one_hot_width(drop_unseen)];
        if let Some(p) = self.one_hot_position(s, drop_unseen) {
            out[p] = 1.0;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn layout_without_mask() {
        let v = VocabIndex::new(&labels(&["a", "b", "c"]), 1, None).unwrap();
        assert_eq!(
            ["a", "b", "c", "z"].map(|s| v.index(s)),
            [1, 2, 3, 0]
        );
        assert_eq!(v.max_index(), 3);
    }

    #[test]
    fn layout_with_mask() {
        let v = VocabIndex::new(&labels(&["a", "b"]), 1, Some("PADDED")).unwrap();
        assert_eq!(
            ["PADDED", "z", "a", "b"].map(|s| v.index(s)),
            [0, 1, 2, 3]
        );
    }

    #[test]
    fn multiple_oov_slots_spread_by_hash() {
        let v = VocabIndex::new(&labels(&["a"]), 4, Some("M")).unwrap();
        // Layout: M->0, OOV 1..=4, a->5.
        assert_eq!(v.index("a"), 5);
        for s in ["x", "y", "hello", "42", ""] {
            let i = v.index(s);
            assert!((1..=4).contains(&i), "{s} -> {i}");
            assert_eq!(i, 1 + i64::from(bucket(s, 42, 4)));
        }
    }

    #[test]
    fn one_hot_examples() {
        let v = VocabIndex::new(&labels(&["a", "b", "c"]), 1, None).unwrap();
        assert_eq!(v.one_hot("a", true), [1.0, 0.0, 0.0]);
        assert_eq!(v.one_hot("z", true), [0.0, 0.0, 0.0]);
        let v = VocabIndex::new(&labels(&["a"]), 1, None).unwrap();
        assert_eq!(v.one_hot("z", false), [1.0, 0.0]);
        assert_eq!(v.one_hot("a", false), [0.0, 1.0]);
        let v = VocabIndex::new(&labels(&["a"]), 1, Some("M")).unwrap();
        assert_eq!(v.one_hot("M", false), [0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_vocab() {
        assert_eq!(
            VocabIndex::new(&labels(&["a", "a"]), 1, None).unwrap_err(),
            VocabError::DuplicateLabel("a".into())
        );
        assert!(VocabIndex::new(&labels(&["M"]), 1, Some("M")).is_err());
        assert!(VocabIndex::new(&labels(&["a"]), 0, None).is_err());
    }

    // Every input lands in [0, max_index]; labels map bijectively onto the
    // label range.
    #[test]
    fn lookup_is_total() {
        let ls = labels(&["a", "b", "c", "d"]);
        for mask in [None, Some("M")] {
            for oov in 1..4 {
                let v = VocabIndex::new(&ls, oov, mask).unwrap();
                let mut seen: Vec<i64> = ls.iter().map(|l| v.index(l)).collect();
                seen.sort();
                seen.dedup();
                assert_eq!(seen.len(), ls.len());
                let first = seen[0];
                assert_eq!(seen, (first..first + ls.len() as i64).collect::<Vec<_>>());
                for probe in (0..200).map(|i| format!("p{i}")) {
                    let i = v.index(&probe);
                    assert!(i >= 0 && i < first, "unseen must land in OOV range");
                }
            }
        }
    }
}
