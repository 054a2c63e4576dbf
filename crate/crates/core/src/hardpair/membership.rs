use serde::{Deserialize, Serialize};

use super::GammaTailClass;
use crate::density::{mean, mgf_diverges_at, tilted_moment, TailDensity, ORACLE_TOL};
use crate::error::Result;
use crate::quadrature::{integrate, integrate_from_origin};

/// Number of tilts on which the MGF domination is checked.
pub const MGF_GRID_POINTS: i32 = 50;

/// Relative slack for inequalities that hold with equality at a class
/// boundary member (`Exp(σ)` for the MGF bound, `Gamma(γ, σ)` for the
/// first-order condition).
const EQUALITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgfGridPoint {
    pub lambda: f64,
    pub mgf: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipDetails {
    /// `∫_0^T e^{σx}f(x)dx` on doubling truncations; grows without bound
    /// when condition 1 holds.
    pub truncated_mgf: Vec<(f64, f64)>,
    pub mgf_grid: Vec<MgfGridPoint>,
    /// `min_j (bound_j − mgf_j)/bound_j` over the grid.
    pub worst_mgf_margin: f64,
    pub mean: f64,
    pub mean_bound: f64,
    /// `E[Re^{λ̄R}]` and `y·E[e^{λ̄R}]`.
    pub foc_lhs: f64,
    pub foc_rhs: f64,
    /// `(lhs − rhs)/rhs`.
    pub foc_margin: f64,
}

/// Outcome of testing the three class conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    /// `R ≥ 0` and `E[e^{σR}] = ∞`.
    pub condition1: bool,
    /// `E[e^{λR}] ≤ σ/(σ−λ)` on the grid and `E[R] ≤ 1/σ`.
    pub condition2: bool,
    /// `E[Re^{λ̄R}] ≥ y·E[e^{λ̄R}]`.
    pub condition3: bool,
    pub details: MembershipDetails,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.condition1 && self.condition2 && self.condition3
    }
}

/// Tests whether `dist` satisfies the Gamma-tail class conditions.
///
/// Condition 1 is certified from the density's analytic tail (divergence is
/// not decidable by finite quadrature); the truncated integrals are reported
/// for inspection. Condition 2 is checked at `λ_j = σ(1 − 2^{−j})`,
/// `j = 0..50`. Condition 3 uses the first-order form at `λ̄ = σ − γ/y`.
pub fn check_membership<D: TailDensity + ?Sized>(dist: &D, class: &GammaTailClass) -> Result<MembershipReport> {
    let sigma = class.sigma();
    let excess = dist.decay_rate() - sigma;

    let condition1 = mgf_diverges_at(dist, sigma);
    let mut truncated_mgf = Vec::new();
    let mut upper = 1.0 / sigma;
    let mut acc = 0.0;
    let mut lower = 0.0;
    for _ in 0..10 {
        let piece = |x: f64| dist.envelope(x) * (-excess * x).exp();
        let part = if lower == 0.0 {
            integrate_from_origin(piece, upper, dist.origin_shape(), ORACLE_TOL)?
        } else {
            integrate(piece, lower, upper, ORACLE_TOL)?
        };
        acc += part.value;
        truncated_mgf.push((upper, acc));
        lower = upper;
        upper *= 2.0;
    }

    let mut mgf_grid = Vec::with_capacity(MGF_GRID_POINTS as usize);
    let mut worst_mgf_margin = f64::INFINITY;
    let mut mgf_ok = true;
    for j in 0..MGF_GRID_POINTS {
        let class_gap = sigma * 0.5f64.powi(j);
        let lambda = sigma - class_gap;
        let bound = sigma / class_gap;
        let gap = excess + class_gap;
        let value = if gap > 0.0 { tilted_moment(dist, 0, gap, ORACLE_TOL)?.value } else { f64::INFINITY };
        let margin = (bound - value) / bound;
        worst_mgf_margin = worst_mgf_margin.min(margin);
        mgf_ok &= margin >= -EQUALITY_SLACK;
        mgf_grid.push(MgfGridPoint { lambda, mgf: value, bound });
    }
    let mean = mean(dist)?;
    let mean_bound = 1.0 / sigma;
    let condition2 = mgf_ok && mean <= mean_bound * (1.0 + EQUALITY_SLACK);

    let gap_bar = excess + class.gamma() / class.y();
    let (foc_lhs, foc_rhs) = if gap_bar > 0.0 {
        let m0 = tilted_moment(dist, 0, gap_bar, ORACLE_TOL)?.value;
        let m1 = tilted_moment(dist, 1, gap_bar, ORACLE_TOL)?.value;
        (m1, class.y() * m0)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let foc_margin = if foc_rhs.is_finite() { (foc_lhs - foc_rhs) / foc_rhs } else { 0.0 };
    let condition3 = foc_margin >= -EQUALITY_SLACK;

    Ok(MembershipReport {
        condition1,
        condition2,
        condition3,
        details: MembershipDetails {
            truncated_mgf,
            mgf_grid,
            worst_mgf_margin,
            mean,
            mean_bound,
            foc_lhs,
            foc_rhs,
            foc_margin,
        },
    })
}
