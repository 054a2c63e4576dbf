use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, nonempty multiset of real-valued cost observations.
///
/// The empirical distribution of these values is the `P̂` the dual plug-in
/// estimator works with. Summary statistics are computed once at
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CostSample {
    values: Vec<f64>,
    max: f64,
    min: f64,
    mean: f64,
    mean_gap: f64,
}

impl CostSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("cost sample must contain at least one value"));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!("cost value #{i} is not finite ({v})")));
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        // Mean of the deviations from the maximum, so that shifting every
        // value by a constant leaves the centered quantities untouched.
        let n = values.len() as f64;
        let centered = values.iter().map(|v| v - max).sum::<f64>() / n;
        let mean = max + centered;
        Ok(CostSample { values, max, min, mean, mean_gap: centered })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a `CostSample` is never empty.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Mean minus maximum, computed from the centered values (always ≤ 0).
    pub(crate) fn mean_gap(&self) -> f64 {
        self.mean_gap
    }

    /// Number of values exactly equal to the maximum.
    pub fn max_count(&self) -> usize {
        self.max_count_within(0.0)
    }

    /// Number of values within `abs_tol` of the maximum.
    pub fn max_count_within(&self, abs_tol: f64) -> usize {
        self.values.iter().filter(|&&v| self.max - v <= abs_tol).count()
    }

    /// Sample standard deviation (n − 1 denominator); zero for n = 1.
    pub fn std_dev(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let ss: f64 = self.values.iter().map(|v| (v - self.mean).powi(2)).sum();
        (ss / (n as f64 - 1.0)).sqrt()
    }

    /// A new sample with every value shifted by `c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v + c).collect())
    }

    /// A new sample with every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl TryFrom<Vec<f64>> for CostSample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        CostSample::new(values)
    }
}

impl From<CostSample> for Vec<f64> {
    fn from(sample: CostSample) -> Self {
        sample.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(CostSample::new(vec![]).is_err());
        assert!(CostSample::new(vec![1.0, f64::NAN]).is_err());
        assert!(CostSample::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn summaries() {
        let s = CostSample::new(vec![0.0, 2.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.max(), 2.0);
        assert_eq!(s.min(), 0.0);
        assert_eq!(s.mean(), 1.25);
        assert_eq!(s.max_count(), 2);
        assert_eq!(s.max_count_within(1.0), 3);
    }

    #[test]
    fn serde_round_trip_validates() {
        let s: CostSample = serde_json::from_str("[1.0, 3.5]").unwrap();
        assert_eq!(s.mean(), 2.25);
        assert!(serde_json::from_str::<CostSample>("[]").is_err());
    }
}
