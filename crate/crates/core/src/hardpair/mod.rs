//! Two-point hard instances for the minimax lower bounds, and numerical
//! verification of the inequalities they are built to satisfy.
//!
//! Two constructions are provided:
//!
//! * [`LdHardPair`] (large-deviations regime, `σy ≥ 2γ`): `P₁ = Gamma(1−η, σ)`
//!   and `P₂` equal to `P₁` below a splice point `x₀` with an `x⁻¹e^{−σx}` tail
//!   above it.
//! * [`MdHardPair`] (moderate-deviations regime): `P₁ = Exp(σ)` and `P₂` a
//!   slightly faster exponential on `[0, x₀]` with an `Exp(σ)`-shaped tail.
//!
//! Both members of both pairs belong to the Gamma-tail class
//! [`GammaTailClass`] under the stated hypotheses; [`check_membership`] tests
//! that numerically for any [`TailDensity`](crate::density::TailDensity).

mod class;
mod ld;
mod md;
mod membership;

pub use class::GammaTailClass;
pub use ld::{x0_schedule, HypothesisCheck, LdDensity, LdHardPair, LdHypotheses, LdTail};
pub use md::{MdDensity, MdHardPair};
pub use membership::{check_membership, MembershipDetails, MembershipReport, MgfGridPoint};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sample::CostSample;

/// Which distribution of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Member {
    #[serde(rename = "1")]
    First,
    #[serde(rename = "2")]
    Second,
}

impl Member {
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Member::First),
            2 => Some(Member::Second),
            _ => None,
        }
    }

    pub(crate) fn index(self) -> u64 {
        match self {
            Member::First => 1,
            Member::Second => 2,
        }
    }
}

/// Either hard-pair construction.
#[derive(Debug, Clone, PartialEq)]
pub enum HardPair {
    Ld(LdHardPair),
    Md(MdHardPair),
}

impl HardPair {
    /// Draws `n` i.i.d. costs from one member; deterministic given `seed`.
    pub fn sample(&self, which: Member, n: usize, seed: u64) -> Result<CostSample> {
        match self {
            HardPair::Ld(p) => p.sample(which, n, seed),
            HardPair::Md(p) => p.sample(which, n, seed),
        }
    }
}

/// Samples one member of a hard pair.
pub fn sample_hard_pair(pair: &HardPair, which: Member, n: usize, seed: u64) -> Result<CostSample> {
    pair.sample(which, n, seed)
}
