use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// A time-varying rate `r(t)` on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateProfile {
    Constant {
        rate: f64,
    },
    /// `r0` before `t0`, linear to `r1` on `[t0, t1]`, `r1` afterwards.
    LinearRamp {
        r0: f64,
        r1: f64,
        t0: f64,
        t1: f64,
    },
    /// `r0` before `t_jump`, `r1` from `t_jump` on.
    Step {
        r0: f64,
        r1: f64,
        t_jump: f64,
    },
    /// `base + amplitude·sin(2πt/period)`.
    Sinusoidal {
        base: f64,
        amplitude: f64,
        period: f64,
    },
}

impl RateProfile {
    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            RateProfile::Constant { rate } => rate,
            RateProfile::LinearRamp { r0, r1, t0, t1 } => {
                if t <= t0 {
                    r0
                } else if t >= t1 {
                    r1
                } else {
                    r0 + (r1 - r0) * (t - t0) / (t1 - t0)
                }
            }
            RateProfile::Step { r0, r1, t_jump } => {
                if t < t_jump {
                    r0
                } else {
                    r1
                }
            }
            RateProfile::Sinusoidal { base, amplitude, period } => base + amplitude * (TAU * t / period).sin(),
        }
    }

    /// Checks that the rate is positive on the whole horizon.
    pub fn validate(&self) -> Result<()> {
        match *self {
            RateProfile::Constant { rate } => ensure_positive("rate", rate),
            RateProfile::LinearRamp { r0, r1, t0, t1 } => {
                ensure_positive("r0", r0)?;
                ensure_positive("r1", r1)?;
                ensure_finite("t0", t0)?;
                ensure_finite("t1", t1)?;
                if t1 <= t0 {
                    return Err(Error::invalid(format!("ramp needs t0 < t1, got [{t0}, {t1}]")));
                }
                Ok(())
            }
            RateProfile::Step { r0, r1, t_jump } => {
                ensure_positive("r0", r0)?;
                ensure_positive("r1", r1)?;
                ensure_finite("t_jump", t_jump)
            }
            RateProfile::Sinusoidal { base, amplitude, period } => {
                ensure_positive("base", base)?;
                ensure_finite("amplitude", amplitude)?;
                ensure_positive("period", period)?;
                if amplitude.abs() >= base {
                    return Err(Error::invalid(format!(
                        "sinusoid must stay positive: |amplitude| {amplitude} >= base {base}"
                    )));
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        let ramp = RateProfile::LinearRamp { r0: 1.0, r1: 2.0, t0: 0.0, t1: 10.0 };
        assert_eq!(ramp.rate(0.0), 1.0);
        assert_eq!(ramp.rate(5.0), 1.5);
        assert_eq!(ramp.rate(20.0), 2.0);
        let step = RateProfile::Step { r0: 1.0, r1: 3.0, t_jump: 50.0 };
        assert_eq!(step.rate(49.999), 1.0);
        assert_eq!(step.rate(50.0), 3.0);
        let sine = RateProfile::Sinusoidal { base: 1.0, amplitude: 0.25, period: 1.0 };
        assert!((sine.rate(0.25) - 1.25).abs() < 1e-12);
        assert!(sine.validate().is_ok());
        assert!(RateProfile::Sinusoidal { base: 1.0, amplitude: 1.0, period: 1.0 }.validate().is_err());
        assert!(RateProfile::Constant { rate: 0.0 }.validate().is_err());
    }
}
