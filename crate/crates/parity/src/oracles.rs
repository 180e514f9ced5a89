//! Naive single-threaded reference implementations of the estimators.

use std::collections::HashMap;

use featherpipe_core::ops::OrderType;

/// Hash-map count, then a full sort.
pub fn oracle_string_index<'a>(
    values: impl IntoIterator<Item = &'a str>,
    order: OrderType,
    mask: Option<&str>,
) -> Vec<String> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for v in values {
        if Some(v) != mask {
            *counts.entry(v).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(&str, usize)> = counts.into_iter().collect();
    match order {
        OrderType::FrequencyDesc => entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0))),
        OrderType::FrequencyAsc => entries.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0))),
        OrderType::AlphabeticalAsc => entries.sort_by(|a, b| a.0.cmp(b.0)),
        OrderType::AlphabeticalDesc => entries.sort_by(|a, b| b.0.cmp(a.0)),
    }
    entries.into_iter().map(|(s, _)| s.to_string()).collect()
}

/// Neumaier-compensated sum.
fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Two-pass population mean and standard deviation per position, with
/// compensated sums; `None` entries are skipped.
pub fn oracle_moments(vectors: &[Vec<Option<f64>>]) -> (Vec<f64>, Vec<f64>) {
    let width = vectors.first().map_or(0, Vec::len);
    let mut means = Vec::with_capacity(width);
    let mut stds = Vec::with_capacity(width);
    for p in 0..width {
        let xs: Vec<f64> = vectors.iter().filter_map(|v| v[p]).collect();
        let n = xs.len() as f64;
        let mean = compensated_sum(xs.iter().copied()) / n;
        let var = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / n;
        means.push(mean);
        stds.push(var.sqrt());
    }
    (means, stds)
}

/// Compensated mean of `values`.
pub fn oracle_mean(values: &[f64]) -> f64 {
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Full-sort median; an even count averages the middle pair.
pub fn oracle_median(values: &[f64]) -> f64 {
    let mut xs = values.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("oracle inputs are not NaN"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(
            oracle_string_index(["a", "b", "a", "c"], OrderType::FrequencyDesc, None),
            ["a", "b", "c"]
        );
        let (m, s) = oracle_moments(&[vec![Some(1.0)], vec![Some(2.0)], vec![Some(3.0)]]);
        assert_eq!(m, [2.0]);
        assert!((s[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(oracle_median(&[5.0]), 5.0);
        let (m, _) = oracle_moments(&[vec![Some(1e12)], vec![Some(0.5)], vec![Some(-1e12)]]);
        assert_eq!(m, [0.5 / 3.0]);
        assert_eq!(oracle_median(&[1.0, 2.0, 9.0]), 2.0);
    }
}
