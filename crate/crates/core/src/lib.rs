//! Stability of stochastic systems under distribution shift.
//!
//! The stability of a cost `R ~ P` at threshold `y` is the smallest
//! KL divergence `D(Q‖P)` over shifted laws `Q` whose mean cost reaches `y`.
//! By convex duality it equals the Legendre transform of the cumulant
//! generating function, `sup_{λ≥0} {λy − log E_P[e^{λR}]}`, which is the
//! Cramér rate function of large-deviations theory.
//!
//! The crate provides
//!
//! * the dual plug-in estimator on samples ([`estimate_stability`]) and the
//!   optimal exponential tilt ([`exponential_tilt`]);
//! * closed forms for exponential, Gamma and chi-squared costs
//!   ([`ParametricCost`]) and a Monte-Carlo link to deviation probabilities
//!   ([`cramer`]);
//! * the two-point hard instances behind the minimax rate and their numerical
//!   verification ([`hardpair`]);
//! * a convergence-experiment harness ([`convergence`]);
//! * a multiclass queue simulator whose path costs feed the estimator
//!   ([`queuesim`]);
//! * CSV/JSON formats ([`io`]).
//!
//! ```
//! use shiftstab::{estimate_stability, CostSample, DEFAULT_TOL};
//!
//! let sample = CostSample::new(vec![0.0, 2.0]).unwrap();
//! let sol = estimate_stability(&sample, 1.5, DEFAULT_TOL).unwrap();
//! assert!((sol.stability.value() - 0.130812).abs() < 1e-6);
//! ```

pub mod convergence;
pub mod cramer;
pub mod density;
mod dual;
mod error;
pub mod families;
pub mod hardpair;
pub mod io;
pub mod quadrature;
pub mod queuesim;
pub mod rng;
mod sample;
pub mod special;
mod tilt;

pub use cramer::{cramer_probability, CramerEstimate, CramerSpec};
pub use dual::{
    dual_objective, estimate_stability, sweep, Boundary, DualSolution, Stability, DEFAULT_TOL, MAX_ITERATIONS,
};
pub use error::{Error, Result};
pub use families::{stability_chi_squared, stability_exponential, stability_gamma, CostSampler, ParametricCost};
pub use sample::CostSample;
pub use tilt::{exponential_tilt, TiltWeights};
