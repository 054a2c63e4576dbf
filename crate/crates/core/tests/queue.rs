use shiftstab::queuesim::*;
use shiftstab::{estimate_stability, DEFAULT_TOL};

fn configs() -> Vec<QueueConfig> {
    let mut out = Vec::new();
    for policy in [PolicyKind::GcMu, PolicyKind::Fifo] {
        out.push(baseline(policy));
        for id in 1..=5 {
            out.push(shift_scenario(id, policy).unwrap());
        }
    }
    out
}

#[test]
fn conservation_and_non_idling() {
    for cfg in configs() {
        for seed in 0..20 {
            let r = simulate_path_traced(&cfg, seed).unwrap();
            let trace = r.trace.as_ref().unwrap();
            assert!(!trace.is_empty());
            for ev in trace {
                for j in 0..3 {
                    assert_eq!(ev.arrivals[j], ev.departures[j] + ev.in_system[j], "{ev:?}");
                }
                if ev.kind == EventKind::ServiceStart {
                    assert!(ev.busy);
                }
            }
            // after all events at a time stamp, waiting jobs imply a busy server
            let mut i = 0;
            while i < trace.len() {
                let mut k = i;
                while k + 1 < trace.len() && trace[k + 1].time == trace[i].time {
                    k += 1;
                }
                let last = &trace[k];
                if last.waiting.iter().sum::<u64>() > 0 {
                    assert!(last.busy, "idle with waiting jobs at t={}", last.time);
                }
                i = k + 1;
            }
        }
    }
}

#[test]
fn within_class_departures_in_arrival_order() {
    for cfg in configs() {
        let r = simulate_path_traced(&cfg, 3).unwrap();
        let mut last = [f64::NEG_INFINITY; 3];
        for ev in r.trace.unwrap().iter().filter(|e| e.kind == EventKind::Departure) {
            assert!(ev.job_arrival >= last[ev.class]);
            last[ev.class] = ev.job_arrival;
        }
    }
}

#[test]
fn fifo_serves_in_global_arrival_order() {
    let cfg = baseline(PolicyKind::Fifo);
    for seed in 0..10 {
        let r = simulate_path_traced(&cfg, seed).unwrap();
        let starts: Vec<(f64, usize)> = r
            .trace
            .unwrap()
            .iter()
            .filter(|e| e.kind == EventKind::ServiceStart)
            .map(|e| (e.job_arrival, e.class))
            .collect();
        assert!(starts.windows(2).all(|w| w[0] <= w[1]), "seed {seed}");
    }
}

#[test]
fn cost_is_nondecreasing_in_time() {
    for cfg in configs() {
        let r = simulate_path_traced(&cfg, 11).unwrap();
        let traj = r.cost_trajectory.unwrap();
        assert!(traj.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1 - 1e-9 * w[0].1.abs()));
        assert_eq!(traj.last().unwrap().1, r.cumulative_cost);
        assert!(r.cumulative_cost >= 0.0);
    }
}

#[test]
fn tracing_does_not_change_the_path() {
    let cfg = shift_scenario(4, PolicyKind::GcMu).unwrap();
    let a = simulate_path(&cfg, 21).unwrap();
    let b = simulate_path_traced(&cfg, 21).unwrap();
    assert_eq!(a.cumulative_cost, b.cumulative_cost);
    assert_eq!(a.per_class_completed, b.per_class_completed);
}

#[test]
fn gc_mu_index_reads_believed_rates() {
    // true service rates differ wildly by class; believed rates are equal
    let mut cfg = baseline(PolicyKind::GcMu);
    cfg.classes[0].service = RateProfile::Constant { rate: 100.0 };
    cfg.classes[2].service = RateProfile::Constant { rate: 0.01 };
    cfg.believed_service = Some(vec![2.0; 3]);
    let policy = GcMu { weights: cfg.weights(), believed_service: cfg.believed_service_rates() };
    let heads = [Some(0.0), None, Some(0.0)];
    let view = QueueView { now: 1.0, head_arrival: &heads, lengths: &[1, 0, 1] };
    // with believed μ the heavier weight wins; with true μ class 1 would
    assert_eq!(policy.select(&view), 2);
    let r1 = simulate_path(&cfg, 4).unwrap();
    let r2 = simulate_path_with(&cfg, &policy, 4, false).unwrap();
    assert_eq!(r1, r2);
    // the shifted scenarios keep indexing at the baseline rate
    for id in [3, 4] {
        let s = shift_scenario(id, PolicyKind::GcMu).unwrap();
        assert_eq!(s.believed_service_rates(), vec![BASELINE_SERVICE; 3]);
        assert!(s.classes[1].service.rate(80.0) < BASELINE_SERVICE);
    }
}

#[test]
fn custom_policy_plugs_in() {
    struct AlwaysLowest;
    impl SchedulingPolicy for AlwaysLowest {
        fn select(&self, view: &QueueView<'_>) -> usize {
            view.lengths.iter().position(|&l| l > 0).unwrap()
        }
    }
    let cfg = baseline(PolicyKind::Fifo);
    let r = simulate_path_with(&cfg, &AlwaysLowest, 1, false).unwrap();
    assert!(r.cumulative_cost > 0.0);
}

#[test]
fn batch_mean_stable_under_doubling() {
    let cfg = baseline(PolicyKind::GcMu);
    let a = run_batch(&cfg, 2_000, 1).unwrap();
    let b = run_batch(&cfg, 4_000, 2).unwrap();
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < 4.0 * se, "{} vs {}", a.mean, b.mean);
}

#[test]
fn batch_is_deterministic() {
    let cfg = shift_scenario(5, PolicyKind::Fifo).unwrap();
    assert_eq!(run_batch(&cfg, 200, 8).unwrap(), run_batch(&cfg, 200, 8).unwrap());
}

#[test]
fn step_surge_raises_cost() {
    for policy in [PolicyKind::GcMu, PolicyKind::Fifo] {
        let base = run_batch(&baseline(policy), 10_000, 5).unwrap();
        let surge = run_batch(&shift_scenario(2, policy).unwrap(), 10_000, 6).unwrap();
        let se = (base.std_error.powi(2) + surge.std_error.powi(2)).sqrt();
        assert!(surge.mean - base.mean > 4.0 * se, "{policy}: {} vs {}", surge.mean, base.mean);
    }
}

#[test]
fn gc_mu_beats_fifo_on_baseline() {
    let g = run_batch(&baseline(PolicyKind::GcMu), 10_000, 13).unwrap();
    let f = run_batch(&baseline(PolicyKind::Fifo), 10_000, 13).unwrap();
    assert!(g.mean < f.mean, "{} vs {}", g.mean, f.mean);
    let y = 2.0 * g.mean;
    let ig = estimate_stability(&g.costs, y, DEFAULT_TOL).unwrap().stability;
    let i_f = estimate_stability(&f.costs, y, DEFAULT_TOL).unwrap().stability;
    assert!(ig > i_f, "{ig:?} vs {i_f:?}");
}
