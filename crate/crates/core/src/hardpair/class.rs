use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Distributions on `[0, ∞)` with abscissa of convergence `σ`, MGF
/// dominated by that of `Exp(σ)`, and optimal tilt at threshold `y` no larger
/// than that of `Gamma(γ, σ)`, namely `λ̄ = σ − γ/y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawClass")]
pub struct GammaTailClass {
    sigma: f64,
    y: f64,
    gamma: f64,
}

#[derive(Deserialize)]
struct RawClass {
    sigma: f64,
    y: f64,
    gamma: f64,
}

impl TryFrom<RawClass> for GammaTailClass {
    type Error = Error;
    fn try_from(r: RawClass) -> Result<Self> {
        GammaTailClass::new(r.sigma, r.y, r.gamma)
    }
}

impl GammaTailClass {
    pub fn new(sigma: f64, y: f64, gamma: f64) -> Result<Self> {
        ensure_positive("sigma", sigma)?;
        ensure_finite("y", y)?;
        ensure_finite("gamma", gamma)?;
        if sigma * y <= 1.0 {
            return Err(Error::invalid(format!("class requires σy > 1, got σy = {}", sigma * y)));
        }
        if !(gamma > 0.5 && gamma < 1.0) {
            return Err(Error::invalid(format!("class requires γ ∈ (1/2, 1), got {gamma}")));
        }
        Ok(GammaTailClass { sigma, y, gamma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `λ̄ = σ − γ/y`, the largest admissible optimal tilt.
    pub fn lambda_bar(&self) -> f64 {
        self.sigma - self.gamma / self.y
    }

    /// `σy ≥ 2γ`.
    pub fn is_large_deviation(&self) -> bool {
        self.sigma * self.y >= 2.0 * self.gamma
    }

    /// Minimax rate exponent `min(½, γ/(σy))`.
    pub fn rate_exponent(&self) -> f64 {
        crate::convergence::rate_exponent(self.sigma, self.y, self.gamma)
    }
}
