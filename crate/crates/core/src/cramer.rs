//! Monte-Carlo link between stability and random-walk deviation
//! probabilities.
//!
//! Cramér's theorem gives `p_m = P(S_m ≥ m·y) = e^{−m·I_y + o(m)}` for the
//! partial sums `S_m` of i.i.d. costs, so `−log(p̂_m)/m` is a direct (biased,
//! `O(log m / m)`) proxy for the stability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::Stability;
use crate::error::{ensure_finite, Error, Result};
use crate::families::CostSampler;
use crate::rng::substream;

const BLOCK: u64 = 4096;

/// Parameters of a deviation-probability experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CramerSpec {
    /// Random-walk length.
    pub m: u64,
    /// Per-step threshold; the event is `S_m ≥ m·y`.
    pub y: f64,
    /// Number of independent walks.
    pub trials: u64,
}

impl CramerSpec {
    pub fn new(m: u64, y: f64, trials: u64) -> Result<Self> {
        let spec = CramerSpec { m, y, trials };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("walk length m must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        ensure_finite("y", self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CramerEstimate {
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    /// Binomial standard error of `p_hat`.
    pub std_error: f64,
    /// `−log(p̂)/m`; infinite when no walk reached the threshold.
    pub rate_proxy: Stability,
    pub zero_count: bool,
}

/// Estimates `P(R₁ + … + R_m ≥ m·y)` over `spec.trials` independent walks.
///
/// Trials are processed in fixed blocks with one substream each, so the
/// estimate is identical however the blocks are scheduled.
pub fn cramer_probability<D: CostSampler + ?Sized>(dist: &D, spec: &CramerSpec, seed: u64) -> Result<CramerEstimate> {
    spec.validate()?;
    let blocks = spec.trials.div_ceil(BLOCK);
    let level = spec.m as f64 * spec.y;
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, &[b]);
            let count = BLOCK.min(spec.trials - b * BLOCK);
            let mut hits = 0u64;
            for _ in 0..count {
                let mut sum = 0.0;
                for _ in 0..spec.m {
                    sum += dist.draw(&mut rng);
                }
                if sum >= level {
                    hits += 1;
                }
            }
            hits
        })
        .sum();

    let trials = spec.trials as f64;
    let p_hat = hits as f64 / trials;
    let std_error = (p_hat * (1.0 - p_hat) / trials).sqrt();
    let zero_count = hits == 0;
    let rate_proxy = if zero_count {
        Stability::Infinite
    } else {
        // −0.0 when p̂ = 1.
        Stability::Finite((-p_hat.ln() / spec.m as f64).max(0.0))
    };
    Ok(CramerEstimate { hits, trials: spec.trials, p_hat, std_error, rate_proxy, zero_count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::ParametricCost;

    #[test]
    fn certain_event() {
        let spec = CramerSpec::new(1, 0.0, 1000).unwrap();
        let est = cramer_probability(&ParametricCost::Exponential { rate: 1.0 }, &spec, 3).unwrap();
        assert_eq!(est.p_hat, 1.0);
        assert_eq!(est.rate_proxy, Stability::Finite(0.0));
        assert!(!est.zero_count);
    }

    #[test]
    fn impossible_event_flags_zero_count() {
        let spec = CramerSpec::new(3, 1e6, 500).unwrap();
        let est = cramer_probability(&ParametricCost::Exponential { rate: 1.0 }, &spec, 3).unwrap();
        assert!(est.zero_count);
        assert_eq!(est.rate_proxy, Stability::Infinite);
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = CramerSpec::new(4, 1.5, 10_000).unwrap();
        let d = ParametricCost::Exponential { rate: 1.0 };
        assert_eq!(cramer_probability(&d, &spec, 11).unwrap(), cramer_probability(&d, &spec, 11).unwrap());
    }

    #[test]
    fn one_step_exponential_tail() {
        let spec = CramerSpec::new(1, 2.0, 1_000_000).unwrap();
        let est = cramer_probability(&ParametricCost::Exponential { rate: 1.0 }, &spec, 5).unwrap();
        let exact = (-2.0f64).exp();
        assert!((est.p_hat - exact).abs() <= 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn invalid_specs() {
        assert!(CramerSpec::new(0, 1.0, 1).is_err());
        assert!(CramerSpec::new(1, 1.0, 0).is_err());
        assert!(CramerSpec::new(1, f64::NAN, 1).is_err());
    }
}
