//! Single-server multiclass queue with convex holding costs.
//!
//! Jobs of class `j` arrive with interarrival law
//! `½ Exp(λ_j(t)) + ½ |N(0, λ_j(t)⁻²·π/2)|` and need `Exp(μ_j(t))` service.
//! Service is non-preemptive and non-idling; each class starts with one job
//! at `t = 0`. A path's cost at the horizon `H` is
//!
//! ```text
//! Σ_departed w_j·sojourn² + Σ_in-system w_j·(H − arrival)²
//! ```
//!
//! Rates are frozen at the start of each draw. Decisions happen at `t = 0`,
//! on arrivals to an idle server, and at service completions; ties go to the
//! lowest class index, and simultaneous events put arrivals before
//! completions.

mod config;
mod policy;
mod profile;
mod sim;

pub use config::{
    baseline, shift_scenario, ClassSpec, QueueConfig, Scenario, BASELINE_ARRIVAL, BASELINE_SERVICE, DEFAULT_HORIZON,
    DEFAULT_WEIGHTS,
};
pub use policy::{gc_mu_index, Fifo, GcMu, PolicyKind, QueueView, SchedulingPolicy};
pub use profile::RateProfile;
pub use sim::{
    draw_interarrival, path_seed, run_batch, simulate_path, simulate_path_traced, simulate_path_with, BatchResult,
    EventKind, SamplePathResult, TraceEvent,
};
