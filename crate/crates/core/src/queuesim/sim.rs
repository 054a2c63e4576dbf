use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::QueueConfig;
use super::policy::{QueueView, SchedulingPolicy};
use crate::error::Result;
use crate::rng::{stream_id, substream, SimRng};
use crate::sample::CostSample;

/// `½ Exp(rate) + ½ |N(0, rate⁻²·π/2)|`; both components have mean `1/rate`.
pub fn draw_interarrival<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        Exp::new(rate).expect("positive rate").sample(rng)
    } else {
        let sd = (PI / 2.0).sqrt() / rate;
        Normal::new(0.0, sd).expect("finite sd").sample(rng).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Arrival,
    ServiceStart,
    Departure,
}

/// State after one event, recorded when tracing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: EventKind,
    pub class: usize,
    /// Arrival time of the job the event concerns.
    pub job_arrival: f64,
    pub arrivals: Vec<u64>,
    pub departures: Vec<u64>,
    pub in_system: Vec<u64>,
    pub waiting: Vec<u64>,
    pub busy: bool,
    /// Departed `w·sojourn²` plus in-system `w·age²` at this time.
    pub cumulative_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePathResult {
    pub cumulative_cost: f64,
    pub per_class_completed: Vec<u64>,
    /// `None` for classes with no departures.
    pub per_class_mean_sojourn: Vec<Option<f64>>,
    pub per_class_in_system: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_trajectory: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEvent>>,
}

struct Job {
    class: usize,
    arrival: f64,
}

struct ClassStreams {
    arrival: SimRng,
    service: SimRng,
}

struct Path<'a> {
    config: &'a QueueConfig,
    weights: Vec<f64>,
    queues: Vec<VecDeque<f64>>,
    in_service: Option<(Job, f64)>,
    next_arrival: Vec<f64>,
    streams: Vec<ClassStreams>,
    arrivals: Vec<u64>,
    departures: Vec<u64>,
    sojourn_sum: Vec<f64>,
    departed_cost: f64,
    trace: Option<Vec<TraceEvent>>,
}

impl Path<'_> {
    fn open_cost(&self, t: f64) -> f64 {
        let queued: f64 = self
            .queues
            .iter()
            .enumerate()
            .map(|(j, q)| q.iter().map(|a| self.weights[j] * (t - a).powi(2)).sum::<f64>())
            .sum();
        let serving =
            self.in_service.as_ref().map_or(0.0, |(job, _)| self.weights[job.class] * (t - job.arrival).powi(2));
        queued + serving
    }

    fn in_system(&self) -> Vec<u64> {
        (0..self.queues.len())
            .map(|j| {
                let s = self.in_service.as_ref().is_some_and(|(job, _)| job.class == j);
                self.queues[j].len() as u64 + s as u64
            })
            .collect()
    }

    fn record(&mut self, time: f64, kind: EventKind, class: usize, job_arrival: f64) {
        if self.trace.is_none() {
            return;
        }
        let ev = TraceEvent {
            time,
            kind,
            class,
            job_arrival,
            arrivals: self.arrivals.clone(),
            departures: self.departures.clone(),
            in_system: self.in_system(),
            waiting: self.queues.iter().map(|q| q.len() as u64).collect(),
            busy: self.in_service.is_some(),
            cumulative_cost: self.departed_cost + self.open_cost(time),
        };
        self.trace.as_mut().expect("tracing").push(ev);
    }

    fn schedule_arrival(&mut self, j: usize, now: f64) {
        if self.config.no_arrivals {
            self.next_arrival[j] = f64::INFINITY;
            return;
        }
        let rate = self.config.classes[j].arrival.rate(now);
        self.next_arrival[j] = now + draw_interarrival(rate, &mut self.streams[j].arrival);
    }

    fn start_service(&mut self, now: f64, policy: &dyn SchedulingPolicy) {
        if self.in_service.is_some() || self.queues.iter().all(VecDeque::is_empty) {
            return;
        }
        let heads: Vec<Option<f64>> = self.queues.iter().map(|q| q.front().copied()).collect();
        let lengths: Vec<usize> = self.queues.iter().map(VecDeque::len).collect();
        let j = policy.select(&QueueView { now, head_arrival: &heads, lengths: &lengths });
        let arrival = self.queues[j].pop_front().expect("policy selected an empty queue");
        // inverse-CDF draw keeps the k-th service of a class on the same uniform across policies
        let u: f64 = self.streams[j].service.random();
        let mu = self.config.classes[j].service.rate(now);
        let completion = now - (1.0 - u).ln() / mu;
        self.in_service = Some((Job { class: j, arrival }, completion));
        self.record(now, EventKind::ServiceStart, j, arrival);
    }
}

/// Simulates one path of the given config under `policy`.
///
/// Each class has its own arrival and service random streams, so two
/// policies run with the same seed see identical arrivals and identical
/// service uniforms per class.
pub fn simulate_path_with(
    config: &QueueConfig,
    policy: &dyn SchedulingPolicy,
    seed: u64,
    traced: bool,
) -> Result<SamplePathResult> {
    config.validate()?;
    let k = config.classes.len();
    let horizon = config.horizon;
    let mut path = Path {
        config,
        weights: config.weights(),
        queues: (0..k).map(|_| VecDeque::from([0.0])).collect(),
        in_service: None,
        next_arrival: vec![f64::INFINITY; k],
        streams: (0..k as u64)
            .map(|j| ClassStreams { arrival: substream(seed, &[j, 0]), service: substream(seed, &[j, 1]) })
            .collect(),
        arrivals: vec![1; k],
        departures: vec![0; k],
        sojourn_sum: vec![0.0; k],
        departed_cost: 0.0,
        trace: traced.then(Vec::new),
    };
    for j in 0..k {
        path.record(0.0, EventKind::Arrival, j, 0.0);
        path.schedule_arrival(j, 0.0);
    }
    path.start_service(0.0, policy);

    loop {
        // earliest arrival, lowest class on ties
        let (ja, ta) = path.next_arrival.iter().enumerate().fold((usize::MAX, f64::INFINITY), |best, (j, &t)| {
            if t < best.1 {
                (j, t)
            } else {
                best
            }
        });
        let tc = path.in_service.as_ref().map_or(f64::INFINITY, |(_, c)| *c);
        let t = ta.min(tc);
        if t > horizon || !t.is_finite() {
            break;
        }
        if ta <= tc {
            path.queues[ja].push_back(ta);
            path.arrivals[ja] += 1;
            path.record(ta, EventKind::Arrival, ja, ta);
            path.schedule_arrival(ja, ta);
            path.start_service(ta, policy);
        } else {
            let (job, _) = path.in_service.take().expect("completion without job");
            let sojourn = tc - job.arrival;
            path.departed_cost += path.weights[job.class] * sojourn * sojourn;
            path.departures[job.class] += 1;
            path.sojourn_sum[job.class] += sojourn;
            path.record(tc, EventKind::Departure, job.class, job.arrival);
            path.start_service(tc, policy);
        }
    }

    let cumulative_cost = path.departed_cost + path.open_cost(horizon);
    let per_class_in_system = path.in_system();
    let per_class_mean_sojourn =
        (0..k).map(|j| (path.departures[j] > 0).then(|| path.sojourn_sum[j] / path.departures[j] as f64)).collect();
    let trace = path.trace.take();
    let cost_trajectory = trace.as_ref().map(|tr| {
        let mut pts: Vec<(f64, f64)> = tr.iter().map(|e| (e.time, e.cumulative_cost)).collect();
        pts.push((horizon, cumulative_cost));
        pts
    });
    Ok(SamplePathResult {
        cumulative_cost,
        per_class_completed: path.departures,
        per_class_mean_sojourn,
        per_class_in_system,
        cost_trajectory,
        trace,
    })
}

/// Simulates one path under the config's own policy.
pub fn simulate_path(config: &QueueConfig, seed: u64) -> Result<SamplePathResult> {
    simulate_path_with(config, config.build_policy().as_ref(), seed, false)
}

/// As [`simulate_path`], keeping the event trace and cost trajectory.
pub fn simulate_path_traced(config: &QueueConfig, seed: u64) -> Result<SamplePathResult> {
    simulate_path_with(config, config.build_policy().as_ref(), seed, true)
}

/// Seed of path `i` in a batch.
pub fn path_seed(seed: u64, path_id: u64) -> u64 {
    stream_id(&[seed, path_id])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub costs: CostSample,
    pub mean: f64,
    pub sd: f64,
    /// `sd/√n`.
    pub std_error: f64,
}

/// Runs `n_paths` independent paths in parallel; costs are in path order.
pub fn run_batch(config: &QueueConfig, n_paths: u64, seed: u64) -> Result<BatchResult> {
    if n_paths == 0 {
        return Err(crate::error::Error::invalid("n_paths must be at least 1"));
    }
    config.validate()?;
    let policy = config.build_policy();
    let policy = policy.as_ref();
    let costs: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| simulate_path_with(config, policy, path_seed(seed, i), false).map(|r| r.cumulative_cost))
        .collect::<Result<_>>()?;
    let costs = CostSample::new(costs)?;
    let mean = costs.mean();
    let sd = costs.std_dev();
    let std_error = sd / (n_paths as f64).sqrt();
    Ok(BatchResult { costs, mean, sd, std_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::queuesim::{baseline, ClassSpec, PolicyKind, RateProfile};

    #[test]
    fn interarrival_mean_is_reciprocal_rate() {
        let mut rng = substream(1, &[]);
        for rate in [1.0, 2.0] {
            let n = 200_000;
            let draws: Vec<f64> = (0..n).map(|_| draw_interarrival(rate, &mut rng)).collect();
            assert!(draws.iter().all(|&d| d > 0.0));
            let m = draws.iter().sum::<f64>() / n as f64;
            let sd = (draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / n as f64).sqrt();
            assert!((m - 1.0 / rate).abs() < 4.0 * sd / (n as f64).sqrt(), "rate {rate}: mean {m}");
        }
    }

    #[test]
    fn no_arrivals_with_fast_service() {
        let mut cfg = baseline(PolicyKind::Fifo);
        cfg.no_arrivals = true;
        for c in &mut cfg.classes {
            c.service = RateProfile::Constant { rate: 1e3 };
        }
        let r = simulate_path(&cfg, 5).unwrap();
        assert_eq!(r.per_class_completed, vec![1, 1, 1]);
        assert!(r.cumulative_cost > 0.0 && r.cumulative_cost < 1e-3);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = baseline(PolicyKind::GcMu);
        assert_eq!(simulate_path(&cfg, 9).unwrap(), simulate_path(&cfg, 9).unwrap());
        assert_ne!(simulate_path(&cfg, 9).unwrap().cumulative_cost, simulate_path(&cfg, 10).unwrap().cumulative_cost);
    }

    #[test]
    fn single_path_batch() {
        let cfg = baseline(PolicyKind::Fifo);
        let b = run_batch(&cfg, 1, 3).unwrap();
        assert_eq!(b.costs.len(), 1);
        assert_eq!(b.costs.values()[0], simulate_path(&cfg, path_seed(3, 0)).unwrap().cumulative_cost);
    }

    #[test]
    fn single_class_queue_runs() {
        let cfg = QueueConfig {
            classes: vec![ClassSpec {
                weight: 1.0,
                arrival: RateProfile::Constant { rate: 1.0 },
                service: RateProfile::Constant { rate: 2.0 },
            }],
            horizon: 10.0,
            policy: PolicyKind::GcMu,
            believed_service: None,
            no_arrivals: false,
        };
        let r = simulate_path_traced(&cfg, 0).unwrap();
        assert!(r.cumulative_cost > 0.0);
        assert!(r.trace.unwrap().len() > 3);
    }
}
