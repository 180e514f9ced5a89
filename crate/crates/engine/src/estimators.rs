//! Mergeable partial aggregates for the fitted stages.
//!
//! Each estimator accumulates a partial per partition, partials are merged,
//! and the merged partial is finalized into a [`FittedState`].

use std::collections::HashMap;

use featherpipe_core::ops::OrderType;
use featherpipe_core::Real;
use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Label occurrence counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyPartial {
    pub counts: HashMap<String, u64>,
}

impl FrequencyPartial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, label: &str) {
        match self.counts.get_mut(label) {
            Some(n) => *n += 1,
            None => {
                self.counts.insert(label.to_string(), 1);
            }
        }
    }

    pub fn merge(mut self, other: FrequencyPartial) -> FrequencyPartial {
        for (label, n) in other.counts {
            *self.counts.entry(label).or_insert(0) += n;
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Distinct labels in `order`; frequency ties go to the smaller label.
    pub fn labels(&self, order: OrderType) -> Vec<String> {
        let mut entries: Vec<(&String, u64)> = self.counts.iter().map(|(k, v)| (k, *v)).collect();
        entries.sort_by(|(a, na), (b, nb)| {
            let by_label = a.as_str().cmp(b.as_str());
            match order {
                OrderType::FrequencyDesc => nb.cmp(na).then(by_label),
                OrderType::FrequencyAsc => na.cmp(nb).then(by_label),
                OrderType::AlphabeticalAsc => by_label,
                OrderType::AlphabeticalDesc => by_label.reverse(),
            }
        });
        entries.into_iter().map(|(k, _)| k.clone()).collect()
    }
}

/// Bits that make every finite `f64` an integer multiple of `2^-SHIFT`.
const SHIFT: u32 = 1075;

/// Exact running moments for one position.
///
/// Finite inputs are summed as fixed-point big integers (`x·2^1075` and
/// `x²·2^2150`), so sums never round and merging in any order gives the same
/// bits. Non-finite inputs are counted separately.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExactMoments {
    n: u64,
    sum: BigInt,
    sum_sq: BigInt,
    nan: u64,
    pos_inf: u64,
    neg_inf: u64,
}

impl ExactMoments {
    pub fn observe(&mut self, x: f64) {
        self.n += 1;
        if x.is_nan() {
            self.nan += 1;
        } else if x == f64::INFINITY {
            self.pos_inf += 1;
        } else if x == f64::NEG_INFINITY {
            self.neg_inf += 1;
        } else if x != 0.0 {
            let (mantissa, exp, sign) = num_traits::float::FloatCore::integer_decode(x);
            let shift = (exp as i32 + SHIFT as i32) as usize;
            let m = BigInt::from(mantissa);
            let scaled = &m << shift;
            self.sum_sq += (&m * &m) << (2 * shift);
            if sign < 0 {
                self.sum -= scaled;
            } else {
                self.sum += scaled;
            }
        }
    }

    pub fn merge(&mut self, other: &ExactMoments) {
        self.n += other.n;
        self.sum += &other.sum;
        self.sum_sq += &other.sum_sq;
        self.nan += other.nan;
        self.pos_inf += other.pos_inf;
        self.neg_inf += other.neg_inf;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    fn non_finite(&self) -> bool {
        self.nan + self.pos_inf + self.neg_inf > 0
    }

    /// Population mean, correctly rounded from the exact sum.
    pub fn mean(&self) -> f64 {
        if self.n == 0 || self.nan > 0 || (self.pos_inf > 0 && self.neg_inf > 0) {
            return f64::NAN;
        }
        if self.pos_inf > 0 {
            return f64::INFINITY;
        }
        if self.neg_inf > 0 {
            return f64::NEG_INFINITY;
        }
        let denom = BigInt::from(self.n) << SHIFT as usize;
        ratio_to_f64(BigRational::new(self.sum.clone(), denom))
    }

    /// Population standard deviation from the exact variance.
    pub fn std(&self) -> f64 {
        if self.n == 0 || self.non_finite() {
            return f64::NAN;
        }
        let n = BigInt::from(self.n);
        let num = &n * &self.sum_sq - &self.sum * &self.sum;
        if num.sign() != Sign::Plus {
            return 0.0;
        }
        let denom = (&n * &n) << (2 * SHIFT as usize);
        ratio_to_f64(BigRational::new(num, denom)).sqrt()
    }
}

fn ratio_to_f64(r: BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().unwrap_or(f64::NAN)
}

/// Per-position moments for standard scaling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentsPartial<T> {
    positions: Vec<ExactMoments>,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Real> MomentsPartial<T> {
    pub fn new(positions: usize) -> Self {
        MomentsPartial {
            positions: vec![ExactMoments::default(); positions],
            _scalar: std::marker::PhantomData,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn observe(&mut self, position: usize, x: T) {
        self.positions[position].observe(x.to_f64().unwrap_or(f64::NAN));
    }

    pub fn merge(mut self, other: &MomentsPartial<T>) -> MomentsPartial<T> {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.positions.iter_mut().zip(&other.positions) {
            a.merge(b);
        }
        self
    }

    pub fn count(&self, position: usize) -> u64 {
        self.positions[position].count()
    }

    /// Positions with no observations.
    pub fn empty_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.positions[i].count() == 0).collect()
    }

    pub fn mean(&self) -> Vec<T> {
        self.positions.iter().map(|m| T::lit(m.mean())).collect()
    }

    pub fn std(&self) -> Vec<T> {
        self.positions.iter().map(|m| T::lit(m.std())).collect()
    }
}

/// Partial state for imputation.
#[derive(Debug, Clone, PartialEq)]
pub enum ImputePartial {
    Mean(ExactMoments),
    /// Every non-missing value seen; exact at the cost of memory.
    Median(Vec<f64>),
}

impl ImputePartial {
    pub fn observe(&mut self, x: f64) {
        match self {
            ImputePartial::Mean(m) => m.observe(x),
            ImputePartial::Median(xs) => xs.push(x),
        }
    }

    pub fn merge(self, other: ImputePartial) -> ImputePartial {
        match (self, other) {
            (ImputePartial::Mean(mut a), ImputePartial::Mean(b)) => {
                a.merge(&b);
                ImputePartial::Mean(a)
            }
            (ImputePartial::Median(mut a), ImputePartial::Median(b)) => {
                a.extend(b);
                ImputePartial::Median(a)
            }
            _ => unreachable!("partials of one stage share a strategy"),
        }
    }

    pub fn count(&self) -> u64 {
        match self {
            ImputePartial::Mean(m) => m.count(),
            ImputePartial::Median(xs) => xs.len() as u64,
        }
    }

    /// The fill value, or `None` when nothing was observed.
    pub fn finalize(self) -> Option<f64> {
        match self {
            ImputePartial::Mean(m) => (m.count() > 0).then(|| m.mean()),
            ImputePartial::Median(xs) => median(xs),
        }
    }
}

/// Exact median; an even count averages the two middle values.
pub fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let mid = xs.len() / 2;
    Some(if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        midpoint(xs[mid - 1], xs[mid])
    })
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = (a + b) / 2.0;
    if m.is_finite() {
        m
    } else {
        a / 2.0 + b / 2.0
    }
}
