//! Monte-Carlo convergence experiments for the dual plug-in estimator.
//!
//! For each sample size `n` the harness draws independent samples, estimates
//! the stability and records the error against the true value. Errors are
//! summarized by their mean square, and the log-log slope of MSE against `n`
//! is fitted by least squares. The minimax rate for the Gamma-tail class is
//! `n^{−min(½, γ/(σy))}` for the root-MSE, so the MSE slope should sit near
//! `−2·min(½, γ/(σy))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::density_stability;
use crate::dual::{estimate_stability, Stability, DEFAULT_TOL};
use crate::error::{ensure_finite, Error, Result};
use crate::families::{CostSampler, ParametricCost};
use crate::hardpair::{GammaTailClass, HardPair, LdHardPair, LdHypotheses, MdHardPair, Member};
use crate::io::ConvergenceRow;
use crate::rng::{stream_id, substream};
use crate::sample::CostSample;

/// `min(½, γ/(σy))`.
///
/// `γ = 1` is accepted as the exponential boundary case.
pub fn rate_exponent(sigma: f64, y: f64, gamma: f64) -> f64 {
    (gamma / (sigma * y)).min(0.5)
}

/// Cost distribution driving an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvergenceFamily {
    Exponential {
        sigma: f64,
    },
    Gamma {
        alpha: f64,
        sigma: f64,
    },
    /// One member of the large-deviations pair for the class `(σ, y, γ)`,
    /// with `y` taken from the experiment. Without `x0` the smallest
    /// admissible splice point is used.
    LdPairMember {
        sigma: f64,
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<f64>,
        member: Member,
    },
    MdPairMember {
        sigma: f64,
        omega: f64,
        x0: f64,
        member: Member,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub family: ConvergenceFamily,
    pub y: f64,
    pub sample_sizes: Vec<u64>,
    pub replications: u64,
    pub seed: u64,
}

impl ConvergenceConfig {
    /// Default grid `n ∈ {10³, 10⁴, 10⁵, 10⁶}` with 40 replications.
    pub fn new(family: ConvergenceFamily, y: f64, seed: u64) -> Self {
        ConvergenceConfig { family, y, sample_sizes: vec![1_000, 10_000, 100_000, 1_000_000], replications: 40, seed }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("y", self.y)?;
        if self.sample_sizes.is_empty() {
            return Err(Error::invalid("sample_sizes must be nonempty"));
        }
        if self.sample_sizes[0] == 0 {
            return Err(Error::invalid("sample sizes must be positive"));
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sample_sizes must be strictly increasing"));
        }
        if self.replications < 2 {
            return Err(Error::invalid(format!("replications must be at least 2, got {}", self.replications)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceResult {
    pub per_size: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln mse` on `ln n`; absent when fewer than two
    /// sizes have a positive finite MSE.
    pub fitted_slope: Option<f64>,
    pub true_i: f64,
}

enum Source {
    Parametric(ParametricCost),
    Pair(HardPair, Member),
}

impl Source {
    fn build(family: &ConvergenceFamily, y: f64) -> Result<Self> {
        Ok(match *family {
            ConvergenceFamily::Exponential { sigma } => {
                let d = ParametricCost::Exponential { rate: sigma };
                d.validate()?;
                Source::Parametric(d)
            }
            ConvergenceFamily::Gamma { alpha, sigma } => {
                let d = ParametricCost::Gamma { shape: alpha, rate: sigma };
                d.validate()?;
                Source::Parametric(d)
            }
            ConvergenceFamily::LdPairMember { sigma, gamma, x0, member } => {
                let class = GammaTailClass::new(sigma, y, gamma)?;
                let x0 = match x0 {
                    Some(x) => x,
                    None => LdHypotheses::for_class(&class).smallest_admissible_x0().ok_or_else(|| {
                        Error::Infeasible("splice-point fixed-point iteration did not converge".into())
                    })?,
                };
                Source::Pair(HardPair::Ld(LdHardPair::new(class, x0)?), member)
            }
            ConvergenceFamily::MdPairMember { sigma, omega, x0, member } => {
                Source::Pair(HardPair::Md(MdHardPair::new(sigma, omega, x0)?), member)
            }
        })
    }

    fn true_stability(&self, y: f64) -> Result<Stability> {
        match self {
            Source::Parametric(d) => Ok(d.stability(y)?.stability),
            Source::Pair(HardPair::Ld(p), m) => Ok(density_stability(&p.member(*m), y)?.stability),
            Source::Pair(HardPair::Md(p), m) => Ok(density_stability(&p.member(*m), y)?.stability),
        }
    }

    fn sample(&self, n: u64, seed: u64, rep: u64) -> Result<CostSample> {
        match self {
            Source::Parametric(d) => {
                let mut rng = substream(seed, &[n, rep]);
                CostSample::new(d.sample_n(n as usize, &mut rng))
            }
            Source::Pair(p, m) => p.sample(*m, n as usize, stream_id(&[seed, n, rep])),
        }
    }
}

/// Runs the experiment; deterministic given the config, whatever the
/// thread count.
pub fn run_convergence(config: &ConvergenceConfig) -> Result<ConvergenceResult> {
    config.validate()?;
    let source = Source::build(&config.family, config.y)?;
    let true_i = source
        .true_stability(config.y)?
        .finite()
        .ok_or_else(|| Error::Regime(format!("true stability is infinite at y = {}", config.y)))?;

    let mut per_size = Vec::with_capacity(config.sample_sizes.len());
    for &n in &config.sample_sizes {
        let estimates: Vec<Stability> = (0..config.replications)
            .into_par_iter()
            .map(|rep| {
                let sample = source.sample(n, config.seed, rep)?;
                Ok(estimate_stability(&sample, config.y, DEFAULT_TOL)?.stability)
            })
            .collect::<Result<_>>()?;
        per_size.push(summarize(n, true_i, &estimates));
    }
    let fitted_slope = fit_log_log_slope(&per_size);
    Ok(ConvergenceResult { per_size, fitted_slope, true_i })
}

fn summarize(n: u64, true_i: f64, estimates: &[Stability]) -> ConvergenceRow {
    let errors: Vec<f64> = estimates.iter().filter_map(|s| s.finite()).map(|v| v - true_i).collect();
    let boundary_count = (estimates.len() - errors.len()) as u64;
    let k = errors.len() as f64;
    let (mse, mean_error, sd_error) = if errors.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let mean = errors.iter().sum::<f64>() / k;
        let mse = errors.iter().map(|e| e * e).sum::<f64>() / k;
        let sd = if errors.len() > 1 {
            (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        (mse, mean, sd)
    };
    ConvergenceRow { n, mse, mean_error, sd_error, boundary_count }
}

/// OLS slope of `ln mse` on `ln n` over rows with positive finite MSE.
pub fn fit_log_log_slope(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.mse.is_finite() && r.mse > 0.0).map(|r| ((r.n as f64).ln(), r.mse.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_exponent_examples() {
        assert_eq!(rate_exponent(0.9, 2.0, 1.0), 0.5);
        assert!((rate_exponent(1.1, 2.0, 1.0) - 1.0 / 2.2).abs() < 1e-15);
        assert_eq!(rate_exponent(1.0, 2.0, 1.0), 0.5);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let rows: Vec<ConvergenceRow> = [10u64, 100, 1000]
            .iter()
            .map(|&n| ConvergenceRow { n, mse: 3.0 / n as f64, mean_error: 0.0, sd_error: 0.0, boundary_count: 0 })
            .collect();
        assert!((fit_log_log_slope(&rows).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let fam = ConvergenceFamily::Exponential { sigma: 1.0 };
        let mut c = ConvergenceConfig::new(fam, 2.0, 0);
        assert!(c.validate().is_ok());
        c.replications = 1;
        assert!(c.validate().is_err());
        c.replications = 2;
        c.sample_sizes = vec![100, 100];
        assert!(c.validate().is_err());
    }

    #[test]
    fn boundary_replications_are_excluded() {
        let est = [Stability::Finite(1.0), Stability::Infinite, Stability::Finite(3.0)];
        let row = summarize(10, 2.0, &est);
        assert_eq!(row.boundary_count, 1);
        assert_eq!(row.mse, 1.0);
        assert_eq!(row.mean_error, 0.0);
    }

    #[test]
    fn small_run_is_reproducible() {
        let cfg = ConvergenceConfig {
            family: ConvergenceFamily::Exponential { sigma: 1.0 },
            y: 2.0,
            sample_sizes: vec![100, 1000],
            replications: 8,
            seed: 11,
        };
        let a = run_convergence(&cfg).unwrap();
        let b = run_convergence(&cfg).unwrap();
        assert_eq!(a, b);
        assert!((a.true_i - (1.0 - 2f64.ln())).abs() < 1e-15);
    }
}
