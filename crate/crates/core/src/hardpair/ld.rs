use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::{GammaTailClass, Member};
use crate::density::{density_stability, kl_divergence, total_mass, TailDensity};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_tail, Integral, Tolerance};
use crate::rng::substream;
use crate::sample::CostSample;
use crate::special::{gamma as gamma_fn, ln_gamma};

const TAIL_TOL: Tolerance = Tolerance::new(1e-300, 1e-13);
const KL_TOL: Tolerance = Tolerance::new(1e-300, 1e-10);
const MIN_ACCEPTANCE: f64 = 1e-3;
const FIXED_POINT_MAX_ITER: usize = 500;

/// Tail branch of the second member above the splice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LdTail {
    /// `C·x⁻¹e^{−σx}`: the hard-instance tail.
    Reciprocal,
    /// The first member's own tail, making the two members identical.
    Gamma,
}

/// Large-deviations hard pair.
///
/// With `η = 1 − γ − 1/(σx₀)` and `a = σ^{1−η}/Γ(1−η)`:
///
/// ```text
/// f₁(x) = a·x^{−η}e^{−σx}                       x ≥ 0
/// f₂(x) = a·x^{−η}e^{−σx}   on [0, x₀],   C·x⁻¹e^{−σx}   on (x₀, ∞)
/// ```
///
/// where `C` equates the two tail masses above `x₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdHardPair {
    class: GammaTailClass,
    x0: f64,
    eta: f64,
    norm_c: f64,
    tail: LdTail,
    ln_body_coef: f64,
    /// `e^{σx₀}∫_{x₀}^∞ x^{−η}e^{−σx}dx`.
    scaled_power_tail: f64,
    /// `e^{σx₀}∫_{x₀}^∞ x⁻¹e^{−σx}dx = e^{σx₀}E₁(σx₀)`.
    scaled_reciprocal_tail: f64,
}

impl LdHardPair {
    pub fn new(class: GammaTailClass, x0: f64) -> Result<Self> {
        Self::build(class, x0, LdTail::Reciprocal)
    }

    /// A degenerate pair whose second member keeps the first member's tail.
    pub fn with_gamma_tail(class: GammaTailClass, x0: f64) -> Result<Self> {
        Self::build(class, x0, LdTail::Gamma)
    }

    fn build(class: GammaTailClass, x0: f64, tail: LdTail) -> Result<Self> {
        if !(x0.is_finite() && x0 > 1.0) {
            return Err(Error::Infeasible(format!("splice point must satisfy x0 > 1, got {x0}")));
        }
        let sigma = class.sigma();
        let eta = 1.0 - class.gamma() - 1.0 / (sigma * x0);
        if eta <= 0.0 {
            return Err(Error::Infeasible(format!(
                "η = 1 − γ − 1/(σx₀) = {eta} must be positive (needs x₀ > 1/(σ(1 − γ)) = {})",
                1.0 / (sigma * (1.0 - class.gamma()))
            )));
        }
        if eta >= 1.0 {
            return Err(Error::Infeasible(format!("η = {eta} must be below 1")));
        }
        let ln_body_coef = (1.0 - eta) * sigma.ln() - ln_gamma(1.0 - eta);
        let scaled =
            |power: f64| integrate_tail(|x: f64| x.powf(-power) * (-sigma * (x - x0)).exp(), x0, sigma, TAIL_TOL);
        let scaled_power_tail = scaled(eta)?.value;
        let scaled_reciprocal_tail = scaled(1.0)?.value;
        let norm_c = ln_body_coef.exp() * scaled_power_tail / scaled_reciprocal_tail;
        Ok(LdHardPair { class, x0, eta, norm_c, tail, ln_body_coef, scaled_power_tail, scaled_reciprocal_tail })
    }

    pub fn class(&self) -> &GammaTailClass {
        &self.class
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Tail constant `C`.
    pub fn norm_c(&self) -> f64 {
        self.norm_c
    }

    pub fn tail(&self) -> LdTail {
        self.tail
    }

    /// `σ^{1−η}/Γ(1−η)`, the normalizing constant of `f₁`.
    pub fn body_coef(&self) -> f64 {
        self.ln_body_coef.exp()
    }

    /// Lower and upper bracket on `C` from the incomplete-gamma estimates.
    pub fn c_bracket(&self) -> (f64, f64) {
        let sigma = self.class.sigma();
        let sx0 = sigma * self.x0;
        let base = sigma.powf(1.0 - self.eta) / gamma_fn(1.0 - self.eta) * self.x0.powf(1.0 - self.eta);
        (base * (1.0 - self.eta / sx0), base * (1.0 + 1.0 / (sx0 - 1.0)))
    }

    /// `f₂(x₀⁺)/f₁(x₀) = C·x₀^{η−1}·Γ(1−η)/σ^{1−η}`.
    pub fn splice_ratio(&self) -> f64 {
        let sigma = self.class.sigma();
        self.norm_c * self.x0.powf(self.eta - 1.0) * gamma_fn(1.0 - self.eta) / sigma.powf(1.0 - self.eta)
    }

    /// Mass of either member above `x₀`.
    pub fn tail_mass(&self) -> f64 {
        self.body_coef() * self.scaled_power_tail * (-self.class.sigma() * self.x0).exp()
    }

    pub fn member(&self, which: Member) -> LdDensity {
        LdDensity {
            sigma: self.class.sigma(),
            eta: self.eta,
            x0: self.x0,
            ln_body_coef: self.ln_body_coef,
            ln_c: self.norm_c.ln(),
            reciprocal_tail: which == Member::Second && self.tail == LdTail::Reciprocal,
        }
    }

    /// Lower bound on `I(P₂) − I(P₁)`, claimed for `σy ≥ 2γ`:
    ///
    /// ```text
    /// (1/Γ(γ))·(y/x₀)^{1−γ}·e^{−(1−η)x₀/y}·(σy − 1)/(2(σy + 1)(σx₀ − 1))
    /// ```
    pub fn separation_bound(&self) -> Result<f64> {
        let (sigma, y, g) = (self.class.sigma(), self.class.y(), self.class.gamma());
        if !self.class.is_large_deviation() {
            return Err(Error::Regime(format!(
                "the large-deviations separation bound needs σy ≥ 2γ, got σy = {} < {}",
                sigma * y,
                2.0 * g
            )));
        }
        let sy = sigma * y;
        Ok((y / self.x0).powf(1.0 - g) / gamma_fn(g) * (-(1.0 - self.eta) * self.x0 / y).exp() * (sy - 1.0)
            / (2.0 * (sy + 1.0) * (sigma * self.x0 - 1.0)))
    }

    /// `KL(P₁‖P₂)` by quadrature over `(x₀, ∞)`, where the densities differ.
    pub fn kl_divergence(&self) -> Result<Integral> {
        let kl = kl_divergence(&self.member(Member::First), &self.member(Member::Second), self.x0, KL_TOL)?;
        Ok(Integral { value: kl.value.max(0.0), ..kl })
    }

    /// `(I(P₁), I(P₂))` at the class threshold, by quadrature CGFs.
    pub fn numeric_stabilities(&self) -> Result<(f64, f64)> {
        let y = self.class.y();
        let i1 = density_stability(&self.member(Member::First), y)?.stability.value();
        let i2 = density_stability(&self.member(Member::Second), y)?.stability.value();
        Ok((i1, i2))
    }

    /// `I(P₂) − I(P₁)` by quadrature.
    pub fn numeric_separation(&self) -> Result<f64> {
        let (i1, i2) = self.numeric_stabilities()?;
        Ok(i2 - i1)
    }

    /// Total mass of each member, by quadrature.
    pub fn normalization(&self) -> Result<(f64, f64)> {
        Ok((total_mass(&self.member(Member::First))?.value, total_mass(&self.member(Member::Second))?.value))
    }

    /// Acceptance rate of the tail rejection sampler: `E[x₀/(x₀ + E)]`,
    /// `E ~ Exp(σ)`.
    pub fn tail_acceptance_rate(&self) -> f64 {
        self.class.sigma() * self.x0 * self.scaled_reciprocal_tail
    }

    pub fn sample(&self, which: Member, n: usize, seed: u64) -> Result<CostSample> {
        if n == 0 {
            return Err(Error::invalid("sample size must be at least 1"));
        }
        let sigma = self.class.sigma();
        let shape = 1.0 - self.eta;
        let gamma = Gamma::new(shape, 1.0 / sigma).map_err(|e| Error::invalid(e.to_string()))?;
        let mut rng = substream(seed, &[0x1D, which.index()]);
        if !self.member(which).reciprocal_tail {
            return CostSample::new((0..n).map(|_| gamma.sample(&mut rng)).collect());
        }
        let tail_mass = self.tail_mass();
        let body_rate = 1.0 - tail_mass;
        let tail_rate = self.tail_acceptance_rate();
        if body_rate < MIN_ACCEPTANCE || tail_rate < MIN_ACCEPTANCE {
            return Err(Error::Config(format!(
                "rejection acceptance too low (body {body_rate:.3e}, tail {tail_rate:.3e})"
            )));
        }
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u: f64 = rng.random();
            let x = if u >= tail_mass {
                // Body: Gamma(1−η, σ) conditioned on x ≤ x₀.
                loop {
                    let x = gamma.sample(&mut rng);
                    if x <= self.x0 {
                        break x;
                    }
                }
            } else {
                // Tail ∝ x⁻¹e^{−σx}: shifted exponential proposal, accept w.p. x₀/x.
                loop {
                    let e: f64 = -(1.0 - rng.random::<f64>()).ln() / sigma;
                    let x = self.x0 + e;
                    if rng.random::<f64>() * x <= self.x0 {
                        break x;
                    }
                }
            };
            out.push(x);
        }
        CostSample::new(out)
    }
}

/// Density of one member of an [`LdHardPair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdDensity {
    sigma: f64,
    eta: f64,
    x0: f64,
    ln_body_coef: f64,
    ln_c: f64,
    reciprocal_tail: bool,
}

impl TailDensity for LdDensity {
    fn decay_rate(&self) -> f64 {
        self.sigma
    }

    fn envelope(&self, x: f64) -> f64 {
        self.ln_envelope(x).exp()
    }

    fn ln_envelope(&self, x: f64) -> f64 {
        if self.reciprocal_tail && x > self.x0 {
            self.ln_c - x.ln()
        } else {
            self.ln_body_coef - self.eta * x.ln()
        }
    }

    fn tail_power(&self) -> f64 {
        if self.reciprocal_tail {
            -1.0
        } else {
            -self.eta
        }
    }

    fn origin_shape(&self) -> f64 {
        1.0 - self.eta
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.x0]
    }
}

/// One named lower bound on the splice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub required_x0: f64,
    pub satisfied: bool,
}

/// Lower bounds on `x₀` required by the class-inclusion, separation and KL
/// lemmas for a given class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdHypotheses {
    /// Smallest `x₀ ≥ 2` reached by iterating
    /// `x₀ ← (y/γ)(2 log x₀ + log(4σ(γ/y ∨ 1)/(1−γ)))` from 2.
    pub class_inclusion: f64,
    pub class_inclusion_converged: bool,
    /// `(2/γ²·(σy+1)/(σy−1) ∨ 2/γ ∨ 4/(σy−1))·y`; `None` outside the LD regime.
    pub separation: Option<f64>,
    /// `max(log 3·(1 ∨ σ⁻²)/(½(1−γ)), 1 + 1/σ)`.
    pub kl: f64,
    /// `σx₀ ≥ 2/(1−γ)`, which keeps `η ∈ [½(1−γ), 1−γ]`.
    pub eta_range: f64,
    inclusion_scale: f64,
    inclusion_offset: f64,
}

impl LdHypotheses {
    pub fn for_class(class: &GammaTailClass) -> Self {
        let (sigma, y, g) = (class.sigma(), class.y(), class.gamma());
        let sy = sigma * y;
        let separation = class.is_large_deviation().then(|| {
            let factor = (2.0 / (g * g) * (sy + 1.0) / (sy - 1.0)).max(2.0 / g).max(4.0 / (sy - 1.0));
            factor * y
        });
        let kl = (3f64.ln() * (1f64).max(sigma.powi(-2)) / (0.5 * (1.0 - g))).max(1.0 + 1.0 / sigma);
        let eta_range = 2.0 / ((1.0 - g) * sigma);
        let offset = (4.0 * sigma * (g / y).max(1.0) / (1.0 - g)).ln();
        let (class_inclusion, class_inclusion_converged) =
            smallest_fixed_point_from(|x| (y / g) * (2.0 * x.ln() + offset), 2.0);
        LdHypotheses {
            class_inclusion,
            class_inclusion_converged,
            separation,
            kl,
            eta_range,
            inclusion_scale: y / g,
            inclusion_offset: offset,
        }
    }

    /// Right-hand side of the class-inclusion condition at `x0`.
    pub fn class_inclusion_rhs(&self, x0: f64) -> f64 {
        (self.class_inclusion_map())(x0).max(2.0)
    }

    pub fn checks(&self, x0: f64) -> Vec<HypothesisCheck> {
        let inclusion = self.class_inclusion_rhs(x0);
        let mut out = vec![
            HypothesisCheck { name: "class inclusion".into(), required_x0: inclusion, satisfied: x0 >= inclusion },
            HypothesisCheck { name: "kl bound".into(), required_x0: self.kl, satisfied: x0 >= self.kl },
            HypothesisCheck { name: "eta range".into(), required_x0: self.eta_range, satisfied: x0 >= self.eta_range },
        ];
        if let Some(s) = self.separation {
            out.push(HypothesisCheck { name: "separation".into(), required_x0: s, satisfied: x0 >= s });
        }
        out
    }

    pub fn all_satisfied(&self, x0: f64) -> bool {
        self.checks(x0).iter().all(|c| c.satisfied)
    }

    /// Smallest `x₀` meeting every hypothesis, by fixed-point iteration on the
    /// class-inclusion condition started from the largest explicit bound.
    /// `None` if the iteration does not converge.
    pub fn smallest_admissible_x0(&self) -> Option<f64> {
        let explicit = self.kl.max(self.eta_range).max(self.separation.unwrap_or(0.0)).max(2.0);
        let (x, ok) = smallest_fixed_point_from(self.class_inclusion_map(), explicit);
        ok.then_some(x)
    }

    fn class_inclusion_map(&self) -> impl Fn(f64) -> f64 {
        let (scale, offset) = (self.inclusion_scale, self.inclusion_offset);
        move |x: f64| scale * (2.0 * x.ln() + offset)
    }
}

/// Smallest `x ≥ start` with `x ≥ g(x)` for a concave increasing `g`.
fn smallest_fixed_point_from<F: Fn(f64) -> f64>(g: F, start: f64) -> (f64, bool) {
    let mut x = start;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let next = g(x).max(start);
        if next <= x * (1.0 + 1e-14) {
            // step over the rounding band so that `x ≥ g(x)` holds exactly
            let mut x = x.max(next);
            while g(x) > x {
                x *= 1.0 + 4.0 * f64::EPSILON;
            }
            return (x, true);
        }
        x = next;
    }
    (x, false)
}

/// Splice point `x₀ = log(cn)/σ` with `c = 1/(2(1−2δ)²)`, which makes the
/// pair's KL at most `1/(cn)`.
pub fn x0_schedule(sigma: f64, n: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::invalid(format!("δ must lie in (0, 1/2), got {delta}")));
    }
    let c = 1.0 / (2.0 * (1.0 - 2.0 * delta).powi(2));
    let x0 = (c * n).ln() / sigma;
    if x0.is_nan() || x0 <= 0.0 {
        return Err(Error::invalid(format!("log(cn) must be positive, got x0 = {x0}")));
    }
    Ok(x0)
}
