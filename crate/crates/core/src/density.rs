//! Densities on `[0, ∞)` with exponential tails, and quadrature-based
//! moment-generating functions, stability and KL divergence for them.
//!
//! A density is described as `f(x) = envelope(x)·e^{−σx}` where the envelope
//! grows at most polynomially. Tilting by `e^{λx}` then leaves the decay
//! `e^{−(σ−λ)x}`; all routines take that residual decay (the "gap" `σ − λ`)
//! directly so that tilts arbitrarily close to `σ` stay representable.

use crate::dual::{Boundary, DualSolution, Stability};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_from_origin, integrate_tail, Integral, Tolerance};
use crate::special::ln_gamma;

/// Tolerance used by the quadrature oracles.
pub const ORACLE_TOL: Tolerance = Tolerance::new(1e-300, 1e-13);

pub trait TailDensity: Sync {
    /// Exponential decay rate `σ`; the density is `envelope(x)·e^{−σx}`.
    fn decay_rate(&self) -> f64;

    /// `f(x)·e^{σx}` for `x > 0`.
    fn envelope(&self, x: f64) -> f64;

    /// `ln envelope(x)`.
    fn ln_envelope(&self, x: f64) -> f64 {
        self.envelope(x).ln()
    }

    /// Power `p` with `envelope(x) ~ x^p` as `x → ∞`.
    fn tail_power(&self) -> f64;

    /// Shape `a` with `f(x) ~ x^{a−1}` as `x → 0`.
    fn origin_shape(&self) -> f64 {
        1.0
    }

    /// Points where the density is not smooth, in increasing order.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.envelope(x) * (-self.decay_rate() * x).exp()
        }
    }
}

/// Splits `[0, ∞)` into a body panel starting at the origin, interior panels
/// between breakpoints, and a tail.
fn panels<D: TailDensity + ?Sized>(d: &D) -> Vec<f64> {
    let mut pts: Vec<f64> = d.breakpoints().into_iter().filter(|&x| x > 0.0).collect();
    if pts.is_empty() {
        pts.push(1.0 / d.decay_rate());
    }
    pts
}

/// `∫ x^k f(x) e^{λx} dx` with `λ = σ − gap`.
pub fn tilted_moment<D: TailDensity + ?Sized>(d: &D, k: i32, gap: f64, tol: Tolerance) -> Result<Integral> {
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::invalid(format!("tilt gap must be positive, got {gap}")));
    }
    let integrand = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let e = d.envelope(x);
        if e == 0.0 {
            return 0.0;
        }
        x.powi(k) * e * (-gap * x).exp()
    };
    let pts = panels(d);
    let mut total = integrate_from_origin(integrand, pts[0], d.origin_shape() + k as f64, tol)?;
    for w in pts.windows(2) {
        total = total + integrate(integrand, w[0], w[1], tol)?;
    }
    let last = *pts.last().expect("at least one panel point");
    Ok(total + integrate_tail(integrand, last, gap, tol)?)
}

/// `E[e^{λR}]`; infinite for `λ ≥ σ` when the tail makes it diverge.
pub fn mgf<D: TailDensity + ?Sized>(d: &D, lambda: f64) -> Result<f64> {
    let gap = d.decay_rate() - lambda;
    if gap <= 0.0 {
        return if mgf_diverges_at(d, lambda) {
            Ok(f64::INFINITY)
        } else {
            Err(Error::invalid("tilts at or past the decay rate are only supported when the MGF diverges"))
        };
    }
    Ok(tilted_moment(d, 0, gap, ORACLE_TOL)?.value)
}

/// Whether `∫ e^{λx} f(x) dx = ∞`, read off the tail's analytic form.
pub fn mgf_diverges_at<D: TailDensity + ?Sized>(d: &D, lambda: f64) -> bool {
    let sigma = d.decay_rate();
    lambda > sigma || (lambda == sigma && d.tail_power() >= -1.0)
}

pub fn total_mass<D: TailDensity + ?Sized>(d: &D) -> Result<Integral> {
    tilted_moment(d, 0, d.decay_rate(), ORACLE_TOL)
}

pub fn mean<D: TailDensity + ?Sized>(d: &D) -> Result<f64> {
    Ok(tilted_moment(d, 1, d.decay_rate(), ORACLE_TOL)?.value)
}

/// Tilted mean `κ'(λ) = E[Re^{λR}] / E[e^{λR}]` at `λ = σ − gap`.
pub fn tilted_mean<D: TailDensity + ?Sized>(d: &D, gap: f64) -> Result<f64> {
    let m0 = tilted_moment(d, 0, gap, ORACLE_TOL)?.value;
    let m1 = tilted_moment(d, 1, gap, ORACLE_TOL)?.value;
    Ok(m1 / m0)
}

/// Population stability `sup_λ {λy − log E[e^{λR}]}` by quadrature CGFs and
/// bisection on the first-order condition `κ'(λ) = y`.
pub fn density_stability<D: TailDensity + ?Sized>(d: &D, y: f64) -> Result<DualSolution> {
    if !y.is_finite() {
        return Err(Error::invalid("threshold must be finite"));
    }
    let sigma = d.decay_rate();
    if y <= mean(d)? {
        return Ok(DualSolution::at_zero());
    }
    // f(gap) = κ'(σ − gap) − y is decreasing in gap; f(σ) = mean − y < 0.
    let mut hi = sigma;
    let mut lo = sigma;
    let mut iterations = 0;
    loop {
        lo *= 0.5;
        iterations += 1;
        if tilted_mean(d, lo)? > y {
            break;
        }
        hi = lo;
        if lo < sigma * 1e-15 {
            return Err(Error::Numeric {
                message: format!("tilted mean stays below y = {y} for every tilt below the decay rate"),
                achieved: lo,
            });
        }
    }
    while hi - lo > 1e-15 * hi {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if tilted_mean(d, mid)? > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gap = 0.5 * (lo + hi);
    let lambda = sigma - gap;
    let m0 = tilted_moment(d, 0, gap, ORACLE_TOL)?.value;
    Ok(DualSolution {
        stability: Stability::Finite((lambda * y - m0.ln()).max(0.0)),
        lambda_star: lambda,
        iterations,
        converged: true,
        boundary: Boundary::Interior,
    })
}

/// `∫_{from}^∞ p ln(p/q)` by quadrature; `from = 0` gives `KL(p‖q)`.
pub fn kl_divergence<P, Q>(p: &P, q: &Q, from: f64, tol: Tolerance) -> Result<Integral>
where
    P: TailDensity + ?Sized,
    Q: TailDensity + ?Sized,
{
    let (sp, sq) = (p.decay_rate(), q.decay_rate());
    let integrand = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let fp = p.pdf(x);
        if fp == 0.0 {
            return 0.0;
        }
        let log_ratio = p.ln_envelope(x) - q.ln_envelope(x) - (sp - sq) * x;
        fp * log_ratio
    };
    let mut pts: Vec<f64> = p.breakpoints().into_iter().chain(q.breakpoints()).filter(|&x| x > from).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = Integral { value: 0.0, error: 0.0, evaluations: 0 };
    let mut start = from;
    if from <= 0.0 {
        let first = pts.first().copied().unwrap_or(1.0 / sp);
        total = total + integrate_from_origin(integrand, first, p.origin_shape(), tol)?;
        start = first;
    }
    for &pt in &pts {
        if pt > start {
            total = total + integrate(integrand, start, pt, tol)?;
            start = pt;
        }
    }
    Ok(total + integrate_tail(integrand, start, sp, tol)?)
}

/// `Exp(σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialDensity {
    pub rate: f64,
}

impl TailDensity for ExponentialDensity {
    fn decay_rate(&self) -> f64 {
        self.rate
    }
    fn envelope(&self, _x: f64) -> f64 {
        self.rate
    }
    fn tail_power(&self) -> f64 {
        0.0
    }
}

/// `Gamma(shape, rate)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaDensity {
    pub shape: f64,
    pub rate: f64,
    ln_norm: f64,
}

impl GammaDensity {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        crate::error::ensure_positive("shape", shape)?;
        crate::error::ensure_positive("rate", rate)?;
        Ok(GammaDensity { shape, rate, ln_norm: shape * rate.ln() - ln_gamma(shape) })
    }
}

impl TailDensity for GammaDensity {
    fn decay_rate(&self) -> f64 {
        self.rate
    }
    fn envelope(&self, x: f64) -> f64 {
        self.ln_envelope(x).exp()
    }
    fn ln_envelope(&self, x: f64) -> f64 {
        self.ln_norm + (self.shape - 1.0) * x.ln()
    }
    fn tail_power(&self) -> f64 {
        self.shape - 1.0
    }
    fn origin_shape(&self) -> f64 {
        self.shape
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::stability_gamma;

    #[test]
    fn gamma_mgf_matches_closed_form() {
        let g = GammaDensity::new(0.75, 1.3).unwrap();
        assert!((total_mass(&g).unwrap().value - 1.0).abs() < 1e-12);
        assert!((mean(&g).unwrap() - 0.75 / 1.3).abs() < 1e-12);
        for &lambda in &[0.0, 0.5, 1.0, 1.29] {
            let exact = (1.3f64 / (1.3 - lambda)).powf(0.75);
            assert!((mgf(&g, lambda).unwrap() / exact - 1.0).abs() < 1e-11, "λ = {lambda}");
        }
    }

    #[test]
    fn mgf_near_abscissa_stays_accurate() {
        let e = ExponentialDensity { rate: 2.0 };
        for j in [10, 30, 49] {
            let gap = 2.0 * 0.5f64.powi(j);
            let m = tilted_moment(&e, 0, gap, ORACLE_TOL).unwrap().value;
            assert!((m / (2.0 / gap) - 1.0).abs() < 1e-9, "j = {j}: {m}");
        }
        assert_eq!(mgf(&e, 2.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn quadrature_stability_matches_gamma_closed_form() {
        let g = GammaDensity::new(0.75, 1.0).unwrap();
        let num = density_stability(&g, 3.0).unwrap();
        let exact = stability_gamma(0.75, 1.0, 3.0).unwrap();
        assert!((num.stability.value() - exact.stability.value()).abs() < 1e-11);
        assert!((num.lambda_star - exact.lambda_star).abs() < 1e-9);
        assert_eq!(density_stability(&g, 0.5).unwrap().boundary, Boundary::AtZero);
    }

    #[test]
    fn kl_between_exponentials() {
        // KL(Exp(a)‖Exp(b)) = ln(a/b) + b/a − 1
        let (a, b) = (1.0, 1.4);
        let kl =
            kl_divergence(&ExponentialDensity { rate: a }, &ExponentialDensity { rate: b }, 0.0, ORACLE_TOL).unwrap();
        assert!((kl.value - ((a / b).ln() + b / a - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn divergence_certification() {
        let g = GammaDensity::new(0.5, 1.0).unwrap();
        assert!(mgf_diverges_at(&g, 1.0));
        assert!(!mgf_diverges_at(&g, 0.9));
    }
}
