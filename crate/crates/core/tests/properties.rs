mod common;

use proptest::prelude::*;
use shiftstab::{dual_objective, estimate_stability, exponential_tilt, Boundary, CostSample, Stability, DEFAULT_TOL};

fn discrete() -> impl Strategy<Value = (Vec<f64>, f64)> {
    // integer support, 2..=6 distinct points, threshold fraction u
    (prop::collection::btree_set(-30i32..=30, 2..=6), prop::collection::vec(1usize..=5, 6), 0.02f64..0.98).prop_map(
        |(support, counts, u)| {
            let values: Vec<f64> =
                support.iter().zip(&counts).flat_map(|(&s, &c)| std::iter::repeat_n(s as f64, c)).collect();
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (values, mean + u * (max - mean))
        },
    )
}

fn est(values: &[f64], y: f64) -> shiftstab::DualSolution {
    estimate_stability(&CostSample::new(values.to_vec()).unwrap(), y, DEFAULT_TOL).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn matches_primal_oracle((values, y) in discrete()) {
        let mut support: Vec<f64> = values.clone();
        support.dedup();
        let counts = support.iter().map(|s| values.iter().filter(|v| *v == s).count()).collect();
        let d = common::Discrete { support, counts };
        let (primal, _) = common::primal_tilt_search(&d, y);
        let dual = est(&values, y);
        prop_assert_eq!(dual.boundary, Boundary::Interior);
        prop_assert!((dual.stability.value() - primal).abs() < 1e-6, "dual {:?} primal {}", dual.stability, primal);
    }

    #[test]
    fn nondecreasing_in_threshold((values, _) in discrete()) {
        let s = CostSample::new(values).unwrap();
        let (lo, hi) = (s.min() - 1.0, s.max() + 1.0);
        let mut prev = Stability::Finite(0.0);
        for i in 0..=80 {
            let y = lo + (hi - lo) * i as f64 / 80.0;
            let cur = estimate_stability(&s, y, DEFAULT_TOL).unwrap().stability;
            prop_assert!(cur >= prev || (cur.value() - prev.value()).abs() < 1e-12, "y={} {:?} < {:?}", y, cur, prev);
            prev = cur;
        }
    }

    #[test]
    fn midpoint_convex((values, _) in discrete(), a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let s = CostSample::new(values).unwrap();
        let (m, x) = (s.mean(), s.max());
        let y1 = m + a.min(b) * (x - m);
        let y2 = m + a.max(b) * (x - m);
        let f = |y: f64| estimate_stability(&s, y, DEFAULT_TOL).unwrap().stability.value();
        prop_assert!(f(0.5 * (y1 + y2)) <= 0.5 * (f(y1) + f(y2)) + 1e-9);
    }

    #[test]
    fn translation_invariant((values, y) in discrete(), c in -1000i32..1000) {
        let c = c as f64;
        // a dyadic threshold keeps y + c exact
        let y = (y * 1024.0).round() / 1024.0;
        let s = CostSample::new(values.clone()).unwrap();
        prop_assume!(y > s.mean() && y < s.max());
        let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
        let a = est(&values, y);
        let b = est(&shifted, y + c);
        prop_assert_eq!(a.stability, b.stability);
        prop_assert_eq!(a.lambda_star, b.lambda_star);
    }

    #[test]
    fn scale_covariant((values, y) in discrete(), c in 0.01f64..100.0) {
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        let a = est(&values, y);
        let b = est(&scaled, y * c);
        prop_assert!((a.stability.value() - b.stability.value()).abs() <= 1e-10 * a.stability.value().max(1.0));
        prop_assert!((a.lambda_star - c * b.lambda_star).abs() <= 1e-8 * a.lambda_star.max(1e-3));
    }

    #[test]
    fn boundary_values((values, _) in discrete(), below in 0.0f64..50.0) {
        let s = CostSample::new(values.clone()).unwrap();
        let low = estimate_stability(&s, s.mean() - below, DEFAULT_TOL).unwrap();
        prop_assert_eq!(low.stability, Stability::Finite(0.0));
        prop_assert_eq!(low.lambda_star, 0.0);
        prop_assert_eq!(low.boundary, Boundary::AtZero);
        let at_max = estimate_stability(&s, s.max(), DEFAULT_TOL).unwrap();
        let k = values.iter().filter(|&&v| v == s.max()).count();
        let expect = (values.len() as f64 / k as f64).ln();
        prop_assert!((at_max.stability.value() - expect).abs() < 1e-14);
        prop_assert_eq!(at_max.boundary, Boundary::InfiniteOrAtMax);
        let above = estimate_stability(&s, s.max() + 0.5, DEFAULT_TOL).unwrap();
        prop_assert_eq!(above.stability, Stability::Infinite);
    }

    #[test]
    fn tilt_reaches_threshold((values, y) in discrete()) {
        let s = CostSample::new(values.clone()).unwrap();
        let sol = estimate_stability(&s, y, DEFAULT_TOL).unwrap();
        let t = exponential_tilt(&s, sol.lambda_star).unwrap();
        prop_assert!((t.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((t.mean_of(&values) - y).abs() <= DEFAULT_TOL * y.abs().max(1.0));
        // KL of the tilt from the sample is the stability itself
        prop_assert!((t.kl_from_uniform() - sol.stability.value()).abs() < 1e-9);
    }

    #[test]
    fn tilt_weight_ratios((values, _) in discrete(), lambda in 0.0f64..3.0) {
        let s = CostSample::new(values.clone()).unwrap();
        let w = exponential_tilt(&s, lambda).unwrap();
        let w = w.weights();
        for i in 1..values.len() {
            let ratio = w[i] / w[0];
            let expect = (lambda * (values[i] - values[0])).exp();
            prop_assert!((ratio / expect - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dual_objective_concave((values, y) in discrete(), h in 0.001f64..0.2) {
        let s = CostSample::new(values).unwrap();
        for i in 1..40 {
            let l = i as f64 * h;
            let f = |l: f64| dual_objective(l, &s, y).unwrap();
            prop_assert!(f(l - h) - 2.0 * f(l) + f(l + h) <= 1e-9);
        }
    }

    #[test]
    fn stability_is_dual_supremum((values, y) in discrete(), lambda in 0.0f64..10.0) {
        let s = CostSample::new(values).unwrap();
        let sol = estimate_stability(&s, y, DEFAULT_TOL).unwrap();
        prop_assert!(dual_objective(lambda, &s, y).unwrap() <= sol.stability.value() + 1e-12);
    }

    #[test]
    fn negative_and_large_costs_do_not_overflow(scale in 1.0f64..1e4, seed in 0u64..1000) {
        use rand::Rng;
        let mut rng = common::rng(seed);
        let values: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0) * scale).collect();
        let s = CostSample::new(values).unwrap();
        let y = s.mean() + 0.9 * (s.max() - s.mean());
        let sol = estimate_stability(&s, y, DEFAULT_TOL).unwrap();
        prop_assert!(sol.stability.value().is_finite() && sol.converged);
        prop_assert!(dual_objective(1e4 / scale, &s, y).unwrap().is_finite());
    }
}

#[test]
fn primal_oracle_is_a_minimizer() {
    // the oracle itself: tilted q beats every feasible perturbation
    let mut rng = common::rng(7);
    for _ in 0..50 {
        let (d, y) = common::random_instance(&mut rng);
        let (_, q) = common::primal_tilt_search(&d, y);
        assert!(common::worst_perturbation_gain(&d, &q, &mut rng, 20) > -1e-12);
    }
}

#[test]
fn two_point_examples() {
    let s = CostSample::new(vec![0.0, 2.0]).unwrap();
    let sol = estimate_stability(&s, 1.5, DEFAULT_TOL).unwrap();
    assert!((sol.lambda_star - 3f64.ln() / 2.0).abs() < 1e-10);
    assert!((sol.stability.value() - (0.75 * 3f64.ln() - 2f64.ln())).abs() < 1e-12);
    let w = exponential_tilt(&s, 3f64.ln() / 2.0).unwrap();
    assert!((w.weights()[0] - 0.25).abs() < 1e-15 && (w.weights()[1] - 0.75).abs() < 1e-15);
    assert!((w.mean_of(s.values()) - 1.5).abs() < 1e-8);
}
