//! The dual plug-in estimator of stability.
//!
//! For a cost sample `R₁..Rₙ` and threshold `y`, the estimator maximizes the
//! concave dual objective
//!
//! ```text
//! φ(λ) = λy − log( (1/n) Σ e^{λRᵢ} ),   λ ≥ 0.
//! ```
//!
//! Everything is evaluated on the centered values `dᵢ = Rᵢ − max R ≤ 0`, so
//! no exponential is ever taken of a positive argument. The same centering
//! makes the estimator translation invariant: shifting the sample and the
//! threshold by a common constant leaves `dᵢ` and `y − max R` unchanged.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ensure_finite, Error, Result};
use crate::sample::CostSample;

/// Default relative tolerance on `κ'(λ*) − y`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Maximum number of safeguarded Newton iterations.
pub const MAX_ITERATIONS: usize = 200;

/// Largest admissible value of `λ·(max R − y)` while expanding the bracket.
pub(crate) const BRACKET_LIMIT: f64 = 1e4;

/// A stability value in nats, or the infinite sentinel for thresholds no
/// shift can reach.
///
/// Serializes as a JSON number, or as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stability {
    Finite(f64),
    Infinite,
}

impl Stability {
    /// The value as a float, with `f64::INFINITY` for the sentinel.
    pub fn value(self) -> f64 {
        match self {
            Stability::Finite(v) => v,
            Stability::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Stability::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Stability::Finite(v) => Some(v),
            Stability::Infinite => None,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v.is_infinite() && v > 0.0 {
            Stability::Infinite
        } else {
            Stability::Finite(v)
        }
    }
}

impl PartialOrd for Stability {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::io::format_f64(self.value()))
    }
}

impl Serialize for Stability {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::io::sentinel::serialize(&self.value(), s)
    }
}

impl<'de> Deserialize<'de> for Stability {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        crate::io::sentinel::deserialize(d).map(Stability::from_f64)
    }
}

/// Which regime of the dual problem the solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `mean < y < max`: the supremum is attained at a finite `λ* > 0`.
    Interior,
    /// `y ≤ mean`: no shift is needed.
    AtZero,
    /// `y ≥ max`: the supremum is approached as `λ → ∞`.
    InfiniteOrAtMax,
}

/// Result of maximizing the dual objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub stability: Stability,
    /// Optimal dual variable, in inverse cost units. `+∞` when the threshold
    /// exceeds the sample maximum.
    #[serde(with = "crate::io::sentinel")]
    pub lambda_star: f64,
    pub iterations: usize,
    pub converged: bool,
    pub boundary: Boundary,
}

impl DualSolution {
    pub(crate) fn at_zero() -> Self {
        DualSolution {
            stability: Stability::Finite(0.0),
            lambda_star: 0.0,
            iterations: 0,
            converged: true,
            boundary: Boundary::AtZero,
        }
    }

    pub(crate) fn closed_form(stability: f64, lambda_star: f64) -> Self {
        DualSolution {
            stability: Stability::Finite(stability),
            lambda_star,
            iterations: 0,
            converged: true,
            boundary: Boundary::Interior,
        }
    }
}

/// Tilted moments of the centered sample about a reference point.
///
/// With `wᵢ = e^{λdᵢ}`: `total = Σwᵢ`, `first = Σwᵢ(dᵢ − r)`,
/// `second = Σwᵢ(dᵢ − r)²`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TiltedMoments {
    pub total: f64,
    pub first: f64,
    pub second: f64,
}

pub(crate) fn tilted_moments(values: &[f64], max: f64, lambda: f64, reference: f64) -> TiltedMoments {
    let mut m = TiltedMoments { total: 0.0, first: 0.0, second: 0.0 };
    for &v in values {
        let d = v - max;
        let w = (lambda * d).exp();
        let e = d - reference;
        m.total += w;
        m.first += w * e;
        m.second += w * e * e;
    }
    m
}

/// `log((1/n) Σ e^{λ(Rᵢ − max R)})`; the shifted log-mean-exp.
pub(crate) fn centered_log_mean_exp(values: &[f64], max: f64, lambda: f64) -> f64 {
    let total: f64 = values.iter().map(|&v| (lambda * (v - max)).exp()).sum();
    (total / values.len() as f64).ln()
}

fn objective_centered(sample: &CostSample, lambda: f64, gap: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    lambda * gap - centered_log_mean_exp(sample.values(), sample.max(), lambda)
}

/// Evaluates the empirical dual objective `λy − log((1/n)Σe^{λRᵢ})`.
pub fn dual_objective(lambda: f64, sample: &CostSample, y: f64) -> Result<f64> {
    ensure_finite("lambda", lambda)?;
    ensure_finite("y", y)?;
    if lambda < 0.0 {
        return Err(Error::invalid(format!("lambda must be nonnegative, got {lambda}")));
    }
    Ok(objective_centered(sample, lambda, y - sample.max()))
}

/// Estimates the stability of `sample` at threshold `y` by maximizing the
/// dual objective.
///
/// * `y ≤ mean`: zero, with `λ* = 0`.
/// * `mean < y < max`: the root of `κ'(λ) = y` is located by safeguarded
///   Newton iteration inside a bracket `[0, λ_hi]`, `λ_hi` doubling from 1.
/// * `y = max` (within `tol·max(1, |max|)`): `log(n/k)` with `k` the number
///   of observations tied at the maximum.
/// * `y > max`: the infinite sentinel.
pub fn estimate_stability(sample: &CostSample, y: f64, tol: f64) -> Result<DualSolution> {
    ensure_finite("y", y)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!("tol must be positive and finite, got {tol}")));
    }
    let max = sample.max();
    let gap = y - max;
    if gap <= sample.mean_gap() {
        return Ok(DualSolution::at_zero());
    }
    let max_tol = tol * max.abs().max(1.0);
    if gap.abs() <= max_tol {
        return Ok(at_max_solution(sample, max_tol));
    }
    if gap > 0.0 {
        return Ok(DualSolution {
            stability: Stability::Infinite,
            lambda_star: f64::INFINITY,
            iterations: 0,
            converged: true,
            boundary: Boundary::InfiniteOrAtMax,
        });
    }
    solve_interior(sample, gap, tol, max_tol)
}

fn at_max_solution(sample: &CostSample, max_tol: f64) -> DualSolution {
    let n = sample.len();
    let k = sample.max_count_within(max_tol);
    // Bracket bound: large enough that every value outside the tie band is
    // suppressed by at least e^{-BRACKET_LIMIT}.
    let runner_up =
        sample.values().iter().map(|v| sample.max() - v).filter(|&d| d > max_tol).fold(f64::INFINITY, f64::min);
    let mut hi = 1.0_f64;
    let mut doublings = 0;
    if runner_up.is_finite() {
        while hi * runner_up <= BRACKET_LIMIT {
            hi *= 2.0;
            doublings += 1;
        }
    }
    DualSolution {
        stability: Stability::Finite((n as f64 / k as f64).ln()),
        lambda_star: hi,
        iterations: doublings,
        converged: true,
        boundary: Boundary::InfiniteOrAtMax,
    }
}

fn solve_interior(sample: &CostSample, gap: f64, tol: f64, max_tol: f64) -> Result<DualSolution> {
    let values = sample.values();
    let max = sample.max();
    // The stopping rule depends only on centered quantities, which keeps the
    // iteration path identical under exact shifts of sample and threshold.
    // It is at least as strict as |κ'(λ) − y| ≤ tol·max(1, |y|).
    let spread = max - sample.min();
    let target = tol * spread.min(1.0);

    // f(λ) = κ'(λ) − y = (Σ wᵢ(dᵢ − gap)) / Σ wᵢ, increasing in λ.
    let eval = |lambda: f64| {
        let m = tilted_moments(values, max, lambda, gap);
        let f = m.first / m.total;
        let fp = (m.second / m.total - f * f).max(0.0);
        (f, fp)
    };

    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut iterations = 0;
    loop {
        let (f, _) = eval(hi);
        iterations += 1;
        if f > 0.0 {
            break;
        }
        if f.abs() <= target {
            let stability = objective_centered(sample, hi, gap).max(0.0);
            return Ok(DualSolution {
                stability: Stability::Finite(stability),
                lambda_star: hi,
                iterations,
                converged: true,
                boundary: Boundary::Interior,
            });
        }
        lo = hi;
        hi *= 2.0;
        if hi * (-gap) > BRACKET_LIMIT {
            // Only reachable when y sits just outside the tie band at the max.
            return Ok(at_max_solution(sample, max_tol));
        }
    }

    let mut lambda = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        iterations += 1;
        let (f, fp) = eval(lambda);
        if f.abs() <= target {
            converged = true;
            break;
        }
        if f < 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let newton = if fp > 0.0 { lambda - f / fp } else { f64::NAN };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if next == lambda || hi - lo <= 4.0 * f64::EPSILON * hi {
            converged = f.abs() <= target;
            break;
        }
        lambda = next;
    }

    let stability = objective_centered(sample, lambda, gap).max(0.0);
    Ok(DualSolution {
        stability: Stability::Finite(stability),
        lambda_star: lambda,
        iterations,
        converged,
        boundary: Boundary::Interior,
    })
}

/// Evaluates [`estimate_stability`] on `steps` evenly spaced thresholds
/// from `y_min` to `y_max` inclusive.
pub fn sweep(sample: &CostSample, y_min: f64, y_max: f64, steps: usize, tol: f64) -> Result<Vec<(f64, DualSolution)>> {
    ensure_finite("y_min", y_min)?;
    ensure_finite("y_max", y_max)?;
    if y_min >= y_max {
        return Err(Error::invalid(format!("sweep needs y_min < y_max, got [{y_min}, {y_max}]")));
    }
    if steps < 2 {
        return Err(Error::invalid(format!("sweep needs at least 2 steps, got {steps}")));
    }
    let h = (y_max - y_min) / (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            let y = if i + 1 == steps { y_max } else { y_min + h * i as f64 };
            estimate_stability(sample, y, tol).map(|s| (y, s))
        })
        .collect()
}
