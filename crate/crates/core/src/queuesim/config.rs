use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::policy::{Fifo, GcMu, PolicyKind, SchedulingPolicy};
use super::profile::RateProfile;
use crate::error::{ensure_positive, Error, Result};

pub const DEFAULT_WEIGHTS: [f64; 3] = [1.0, 3.0, 6.0];
pub const DEFAULT_HORIZON: f64 = 100.0;
pub const BASELINE_ARRIVAL: f64 = 0.6;
pub const BASELINE_SERVICE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub weight: f64,
    pub arrival: RateProfile,
    pub service: RateProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueConfig {
    pub classes: Vec<ClassSpec>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    pub policy: PolicyKind,
    /// Service rates used in the Gc-μ index. When absent, each class's
    /// service rate at `t = 0` is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub believed_service: Option<Vec<f64>>,
    /// Switches arrivals off; only the initial jobs are served.
    #[serde(default)]
    pub no_arrivals: bool,
}

fn default_horizon() -> f64 {
    DEFAULT_HORIZON
}

impl QueueConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::invalid("queue needs at least one class"));
        }
        ensure_positive("horizon", self.horizon)?;
        for (j, c) in self.classes.iter().enumerate() {
            ensure_positive(&format!("weight of class {}", j + 1), c.weight)?;
            c.arrival.validate().map_err(|e| Error::invalid(format!("class {} arrival: {e}", j + 1)))?;
            c.service.validate().map_err(|e| Error::invalid(format!("class {} service: {e}", j + 1)))?;
        }
        if let Some(b) = &self.believed_service {
            if b.len() != self.classes.len() {
                return Err(Error::invalid("believed_service must have one rate per class"));
            }
            for &r in b {
                ensure_positive("believed service rate", r)?;
            }
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.weight).collect()
    }

    pub fn believed_service_rates(&self) -> Vec<f64> {
        match &self.believed_service {
            Some(b) => b.clone(),
            None => self.classes.iter().map(|c| c.service.rate(0.0)).collect(),
        }
    }

    pub fn with_policy(mut self, policy: PolicyKind) -> Self {
        self.policy = policy;
        self
    }

    pub fn build_policy(&self) -> Box<dyn SchedulingPolicy> {
        match self.policy {
            PolicyKind::GcMu => {
                Box::new(GcMu { weights: self.weights(), believed_service: self.believed_service_rates() })
            }
            PolicyKind::Fifo => Box::new(Fifo),
        }
    }
}

/// The stationary baseline or one of the five shift scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Baseline,
    Shift(u8),
}

impl Scenario {
    pub fn config(self, policy: PolicyKind) -> Result<QueueConfig> {
        match self {
            Scenario::Baseline => Ok(baseline(policy)),
            Scenario::Shift(id) => shift_scenario(id, policy),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Baseline => f.write_str("baseline"),
            Scenario::Shift(id) => write!(f, "{id}"),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" | "0" => Ok(Scenario::Baseline),
            _ => match s.parse::<u8>() {
                Ok(id @ 1..=5) => Ok(Scenario::Shift(id)),
                _ => Err(Error::invalid(format!("unknown scenario '{s}' (expected baseline or 1..5)"))),
            },
        }
    }
}

/// Three classes with weights (1, 3, 6), λ = 0.6 and μ = 2 each, horizon 100.
pub fn baseline(policy: PolicyKind) -> QueueConfig {
    let classes = DEFAULT_WEIGHTS
        .iter()
        .map(|&weight| ClassSpec {
            weight,
            arrival: RateProfile::Constant { rate: BASELINE_ARRIVAL },
            service: RateProfile::Constant { rate: BASELINE_SERVICE },
        })
        .collect();
    QueueConfig {
        classes,
        horizon: DEFAULT_HORIZON,
        policy,
        believed_service: Some(vec![BASELINE_SERVICE; 3]),
        no_arrivals: false,
    }
}

/// Shifted versions of the baseline:
///
/// 1. arrivals ramp linearly to 1.5× over the horizon;
/// 2. arrivals jump to 1.5× at `t = 50`;
/// 3. service rates ramp linearly down to 0.75×;
/// 4. both 1 and 3;
/// 5. arrivals oscillate with amplitude 0.25× and period 1.
///
/// Gc-μ keeps indexing with the baseline service rates.
pub fn shift_scenario(id: u8, policy: PolicyKind) -> Result<QueueConfig> {
    let h = DEFAULT_HORIZON;
    let arrival_ramp = RateProfile::LinearRamp { r0: BASELINE_ARRIVAL, r1: 1.5 * BASELINE_ARRIVAL, t0: 0.0, t1: h };
    let arrival_step = RateProfile::Step { r0: BASELINE_ARRIVAL, r1: 1.5 * BASELINE_ARRIVAL, t_jump: 50.0 };
    let service_ramp = RateProfile::LinearRamp { r0: BASELINE_SERVICE, r1: 0.75 * BASELINE_SERVICE, t0: 0.0, t1: h };
    let arrival_sine =
        RateProfile::Sinusoidal { base: BASELINE_ARRIVAL, amplitude: 0.25 * BASELINE_ARRIVAL, period: 1.0 };
    let (arrival, service) = match id {
        1 => (Some(arrival_ramp), None),
        2 => (Some(arrival_step), None),
        3 => (None, Some(service_ramp)),
        4 => (Some(arrival_ramp), Some(service_ramp)),
        5 => (Some(arrival_sine), None),
        _ => return Err(Error::invalid(format!("scenario id must be in 1..=5, got {id}"))),
    };
    let mut cfg = baseline(policy);
    for c in &mut cfg.classes {
        if let Some(a) = arrival {
            c.arrival = a;
        }
        if let Some(s) = service {
            c.service = s;
        }
    }
    Ok(cfg)
}
