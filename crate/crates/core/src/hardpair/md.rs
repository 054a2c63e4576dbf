use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GammaTailClass, Member};
use crate::density::{density_stability, kl_divergence, TailDensity};
use crate::error::{ensure_positive, Error, Result};
use crate::quadrature::{Integral, Tolerance};
use crate::rng::substream;
use crate::sample::CostSample;

const KL_TOL: Tolerance = Tolerance::new(1e-300, 1e-12);

/// Moderate-deviations hard pair: `P₁ = Exp(σ)` and
///
/// ```text
/// f₂(x) = σ(1+ω)e^{−σ(1+ω)x}   on [0, x₀]
///         σe^{−σωx₀}e^{−σx}     on (x₀, ∞)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdHardPair {
    sigma: f64,
    omega: f64,
    x0: f64,
}

impl MdHardPair {
    /// `ω = 0` is accepted and gives two identical members.
    pub fn new(sigma: f64, omega: f64, x0: f64) -> Result<Self> {
        ensure_positive("sigma", sigma)?;
        ensure_positive("x0", x0)?;
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::invalid(format!("omega must be finite and nonnegative, got {omega}")));
        }
        Ok(MdHardPair { sigma, omega, x0 })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn member(&self, which: Member) -> MdDensity {
        MdDensity { sigma: self.sigma, omega: if which == Member::First { 0.0 } else { self.omega }, x0: self.x0 }
    }

    /// `∫f₂` from the two closed-form pieces.
    pub fn second_mass(&self) -> f64 {
        let body = -(-self.sigma * (1.0 + self.omega) * self.x0).exp_m1();
        body + self.second_tail_mass()
    }

    /// `P₂(R > x₀) = e^{−σ(1+ω)x₀}`.
    pub fn second_tail_mass(&self) -> f64 {
        (-self.sigma * (1.0 + self.omega) * self.x0).exp()
    }

    /// `E[R₂] = (1 + ωe^{−σ(1+ω)x₀}) / (σ(1+ω))`.
    pub fn second_mean(&self) -> f64 {
        let s = self.sigma * (1.0 + self.omega);
        (1.0 + self.omega * (-s * self.x0).exp()) / s
    }

    /// `KL(P₁‖P₂) = (ω − log(1+ω))(1 − e^{−σx₀})`.
    pub fn kl_divergence(&self) -> f64 {
        (self.omega - self.omega.ln_1p()) * -(-self.sigma * self.x0).exp_m1()
    }

    /// The same divergence by quadrature.
    pub fn kl_divergence_quadrature(&self) -> Result<Integral> {
        kl_divergence(&self.member(Member::First), &self.member(Member::Second), 0.0, KL_TOL)
    }

    /// Lower bound `(σy − 1)/(ωσy + 1)·(1 − e^{−(σω + 1/y)x₀})·ω` on
    /// `I(P₂) − I(P₁)`; requires `σy > 1`.
    pub fn separation_bound(&self, y: f64) -> Result<f64> {
        let sy = self.sigma * y;
        if sy.is_nan() || sy <= 1.0 {
            return Err(Error::Regime(format!("the separation bound needs σy > 1, got σy = {sy}")));
        }
        let decay = -(-(self.sigma * self.omega + 1.0 / y) * self.x0).exp_m1();
        Ok((sy - 1.0) / (self.omega * sy + 1.0) * decay * self.omega)
    }

    /// `(I(P₁), I(P₂))` at threshold `y` by quadrature CGFs.
    pub fn numeric_stabilities(&self, y: f64) -> Result<(f64, f64)> {
        let i1 = density_stability(&self.member(Member::First), y)?.stability.value();
        let i2 = density_stability(&self.member(Member::Second), y)?.stability.value();
        Ok((i1, i2))
    }

    pub fn numeric_separation(&self, y: f64) -> Result<f64> {
        let (i1, i2) = self.numeric_stabilities(y)?;
        Ok(i2 - i1)
    }

    /// Whether `ω ≤ (1−γ)/(σy) ∧ (2−σy)/(σy)`, under which both members lie
    /// in `class`.
    pub fn satisfies_class_hypothesis(&self, class: &GammaTailClass) -> bool {
        let sy = class.sigma() * class.y();
        self.omega <= ((1.0 - class.gamma()) / sy).min((2.0 - sy) / sy)
    }

    /// Exact inverse-CDF sampling; deterministic given `seed`.
    pub fn sample(&self, which: Member, n: usize, seed: u64) -> Result<CostSample> {
        if n == 0 {
            return Err(Error::invalid("sample size must be at least 1"));
        }
        let mut rng = substream(seed, &[0x3D, which.index()]);
        let d = self.member(which);
        CostSample::new((0..n).map(|_| d.quantile_from_survival(1.0 - rng.random::<f64>())).collect())
    }
}

/// Density of one member of an [`MdHardPair`] (`ω = 0` for the first).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdDensity {
    sigma: f64,
    omega: f64,
    x0: f64,
}

impl MdDensity {
    /// Inverts the survival function at `v ∈ (0, 1]`.
    fn quantile_from_survival(&self, v: f64) -> f64 {
        let s = self.sigma * (1.0 + self.omega);
        if v >= (-s * self.x0).exp() {
            -v.ln() / s
        } else {
            (-v.ln() - self.sigma * self.omega * self.x0) / self.sigma
        }
    }
}

impl TailDensity for MdDensity {
    fn decay_rate(&self) -> f64 {
        self.sigma
    }

    fn envelope(&self, x: f64) -> f64 {
        self.ln_envelope(x).exp()
    }

    fn ln_envelope(&self, x: f64) -> f64 {
        if x <= self.x0 {
            (self.sigma * (1.0 + self.omega)).ln() - self.sigma * self.omega * x
        } else {
            self.sigma.ln() - self.sigma * self.omega * self.x0
        }
    }

    fn tail_power(&self) -> f64 {
        0.0
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.x0]
    }
}
