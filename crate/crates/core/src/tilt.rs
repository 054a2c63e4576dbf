use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::CostSample;

/// Probability weights of the exponentially tilted empirical distribution,
/// `wᵢ ∝ e^{λRᵢ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltWeights {
    weights: Vec<f64>,
}

impl TiltWeights {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mean of `values` under the tilted weights.
    pub fn mean_of(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// KL divergence of the tilted distribution from the uniform one.
    pub fn kl_from_uniform(&self) -> f64 {
        let n = self.weights.len() as f64;
        self.weights.iter().filter(|&&w| w > 0.0).map(|&w| w * (w * n).ln()).sum()
    }
}

/// Tilts the empirical distribution of `sample` by `e^{λR}`.
///
/// Weights are formed from `e^{λ(Rᵢ − max R)}`, so the largest unnormalized
/// weight is exactly 1 and nothing overflows.
pub fn exponential_tilt(sample: &CostSample, lambda: f64) -> Result<TiltWeights> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    let max = sample.max();
    let mut weights: Vec<f64> = sample.values().iter().map(|&v| (lambda * (v - max)).exp()).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(TiltWeights { weights })
}
