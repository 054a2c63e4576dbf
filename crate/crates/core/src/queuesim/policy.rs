use serde::{Deserialize, Serialize};

/// What a scheduling policy sees at a decision epoch.
#[derive(Debug, Clone, Copy)]
pub struct QueueView<'a> {
    pub now: f64,
    /// Arrival time of the oldest waiting job per class, if any.
    pub head_arrival: &'a [Option<f64>],
    pub lengths: &'a [usize],
}

impl QueueView<'_> {
    pub fn head_age(&self, class: usize) -> Option<f64> {
        self.head_arrival[class].map(|a| self.now - a)
    }
}

/// Chooses which class to serve next. Called only when some queue is
/// nonempty; must return a class with a waiting job.
pub trait SchedulingPolicy: Sync {
    fn select(&self, view: &QueueView<'_>) -> usize;
}

/// Marginal cost rate of `w·x²` at age `x` times the service rate.
pub fn gc_mu_index(age: f64, weight: f64, service_rate: f64) -> f64 {
    2.0 * weight * age * service_rate
}

/// Serves the head-of-line job with the largest `C'_j(a_j)·μ̂_j`, where
/// `μ̂_j` are fixed (believed) service rates.
#[derive(Debug, Clone, PartialEq)]
pub struct GcMu {
    pub weights: Vec<f64>,
    pub believed_service: Vec<f64>,
}

impl SchedulingPolicy for GcMu {
    fn select(&self, view: &QueueView<'_>) -> usize {
        let mut best: Option<(usize, f64)> = None;
        for (j, age) in (0..view.lengths.len()).filter_map(|j| view.head_age(j).map(|a| (j, a))) {
            let idx = gc_mu_index(age, self.weights[j], self.believed_service[j]);
            if best.is_none_or(|(_, b)| idx > b) {
                best = Some((j, idx));
            }
        }
        best.expect("select called with all queues empty").0
    }
}

/// Serves the earliest arrival across classes.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Fifo;

impl SchedulingPolicy for Fifo {
    fn select(&self, view: &QueueView<'_>) -> usize {
        let mut best: Option<(usize, f64)> = None;
        for (j, a) in view.head_arrival.iter().enumerate().filter_map(|(j, a)| a.map(|a| (j, a))) {
            if best.is_none_or(|(_, b)| a < b) {
                best = Some((j, a));
            }
        }
        best.expect("select called with all queues empty").0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    GcMu,
    Fifo,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::GcMu => "gcmu",
            PolicyKind::Fifo => "fifo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gcmu" | "gc-mu" => Some(PolicyKind::GcMu),
            "fifo" => Some(PolicyKind::Fifo),
            _ => None,
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
