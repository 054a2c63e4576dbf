//! Closed-form stability for parametric cost distributions.
//!
//! For `R ~ Gamma(α, σ)` (shape α, rate σ) the CGF is `−α log(1 − λ/σ)`, and
//! the Legendre transform at `y > α/σ` is attained at `λ* = σ − α/y`:
//!
//! ```text
//! I_y = σy − α − α log(σy/α)
//! ```
//!
//! The exponential and chi-squared families are the special cases
//! `Gamma(1, σ)` and `Gamma(k/2, 1/2)`.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use crate::dual::DualSolution;
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::rng::SimRng;

/// Anything that can draw i.i.d. real costs.
pub trait CostSampler: Sync {
    fn draw(&self, rng: &mut SimRng) -> f64;

    fn sample_n(&self, n: usize, rng: &mut SimRng) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// Parametric cost laws with closed-form stability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ParametricCost {
    Exponential {
        rate: f64,
    },
    /// Shape/rate parameterization.
    Gamma {
        shape: f64,
        rate: f64,
    },
    ChiSquared {
        k: f64,
    },
}

impl ParametricCost {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ParametricCost::Exponential { rate } => ensure_positive("rate", rate),
            ParametricCost::Gamma { shape, rate } => {
                ensure_positive("shape", shape)?;
                ensure_positive("rate", rate)
            }
            ParametricCost::ChiSquared { k } => ensure_positive("k", k),
        }
    }

    /// `(shape, rate)` of the equivalent Gamma law.
    pub fn gamma_parameters(&self) -> (f64, f64) {
        match *self {
            ParametricCost::Exponential { rate } => (1.0, rate),
            ParametricCost::Gamma { shape, rate } => (shape, rate),
            ParametricCost::ChiSquared { k } => (0.5 * k, 0.5),
        }
    }

    pub fn mean(&self) -> f64 {
        let (shape, rate) = self.gamma_parameters();
        shape / rate
    }

    pub fn stability(&self, y: f64) -> Result<DualSolution> {
        match *self {
            ParametricCost::Exponential { rate } => stability_exponential(rate, y),
            ParametricCost::Gamma { shape, rate } => stability_gamma(shape, rate, y),
            ParametricCost::ChiSquared { k } => stability_chi_squared(k, y),
        }
    }

    /// Parses `exp:RATE`, `gamma:SHAPE,RATE` or `chisq:K`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let nums = args
            .split(',')
            .filter(|a| !a.trim().is_empty())
            .map(|a| a.trim().parse::<f64>().map_err(|e| Error::invalid(format!("bad number '{a}': {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        let dist = match (name.trim().to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("exp" | "exponential", []) => ParametricCost::Exponential { rate: 1.0 },
            ("exp" | "exponential", [rate]) => ParametricCost::Exponential { rate: *rate },
            ("gamma", [shape, rate]) => ParametricCost::Gamma { shape: *shape, rate: *rate },
            ("chisq" | "chi2" | "chi_squared", [k]) => ParametricCost::ChiSquared { k: *k },
            _ => return Err(Error::invalid(format!("unrecognized distribution '{spec}'"))),
        };
        dist.validate()?;
        Ok(dist)
    }
}

impl CostSampler for ParametricCost {
    fn draw(&self, rng: &mut SimRng) -> f64 {
        match *self {
            ParametricCost::Exponential { rate } => {
                // Inverse CDF on (0, 1]; avoids building a distribution per draw.
                let u: f64 = 1.0 - rng.random::<f64>();
                -u.ln() / rate
            }
            _ => {
                let (shape, rate) = self.gamma_parameters();
                Gamma::new(shape, 1.0 / rate).expect("validated parameters").sample(rng)
            }
        }
    }

    fn sample_n(&self, n: usize, rng: &mut SimRng) -> Vec<f64> {
        match *self {
            ParametricCost::Exponential { rate } => {
                let exp = Exp::new(rate).expect("validated rate");
                (0..n).map(|_| exp.sample(rng)).collect()
            }
            _ => {
                let (shape, rate) = self.gamma_parameters();
                let g = Gamma::new(shape, 1.0 / rate).expect("validated parameters");
                (0..n).map(|_| g.sample(rng)).collect()
            }
        }
    }
}

/// Stability of `Gamma(alpha, sigma)` (rate parameterization) at threshold `y`.
pub fn stability_gamma(alpha: f64, sigma: f64, y: f64) -> Result<DualSolution> {
    ensure_positive("alpha", alpha)?;
    ensure_positive("sigma", sigma)?;
    ensure_finite("y", y)?;
    if y <= alpha / sigma {
        return Ok(DualSolution::at_zero());
    }
    let lambda_star = sigma - alpha / y;
    let ratio = sigma * y / alpha;
    let stability = sigma * y - alpha - alpha * ratio.ln();
    Ok(DualSolution::closed_form(stability, lambda_star))
}

/// Stability of `Exp(sigma)`: `σy − 1 − log(σy)` for `y > 1/σ`.
pub fn stability_exponential(sigma: f64, y: f64) -> Result<DualSolution> {
    stability_gamma(1.0, sigma, y)
}

/// Stability of `χ²_k`: `½(y − k + k log(k/y))` for `y > k`.
pub fn stability_chi_squared(k: f64, y: f64) -> Result<DualSolution> {
    ensure_positive("k", k)?;
    ensure_finite("y", y)?;
    if y <= k {
        return Ok(DualSolution::at_zero());
    }
    let stability = 0.5 * (y - k + k * (k / y).ln());
    let lambda_star = 0.5 * (1.0 - k / y);
    Ok(DualSolution::closed_form(stability, lambda_star))
}
