use shiftstab::{cramer_probability, CramerSpec, ParametricCost};
use statrs::function::gamma::gamma_ur;

#[test]
fn twenty_step_walk_matches_gamma_tail_and_rate() {
    let d = ParametricCost::Exponential { rate: 1.0 };
    let spec = CramerSpec::new(20, 2.0, 10_000_000).unwrap();
    let est = cramer_probability(&d, &spec, 2026).unwrap();
    // S₂₀ ~ Gamma(20, 1): P(S₂₀ ≥ 40) = Q(20, 40)
    let exact = gamma_ur(20.0, 40.0);
    assert!((est.p_hat - exact).abs() <= 4.0 * est.std_error, "{} vs {exact}", est.p_hat);
    let i = 1.0 - 2f64.ln();
    assert!((est.rate_proxy.value() - i).abs() < 0.25, "{:?}", est.rate_proxy);
}

#[test]
fn chi_squared_and_gamma_walks() {
    // sums of χ²_k are χ²_{mk}; sums of Gamma(α, σ) are Gamma(mα, σ)
    let spec = CramerSpec::new(4, 3.0, 400_000).unwrap();
    let chi = cramer_probability(&ParametricCost::ChiSquared { k: 1.0 }, &spec, 1).unwrap();
    let exact = gamma_ur(2.0, 6.0);
    assert!((chi.p_hat - exact).abs() <= 4.0 * chi.std_error, "{} vs {exact}", chi.p_hat);
    let g = cramer_probability(&ParametricCost::Gamma { shape: 0.75, rate: 1.0 }, &spec, 2).unwrap();
    let exact = gamma_ur(3.0, 12.0);
    assert!((g.p_hat - exact).abs() <= 4.0 * g.std_error, "{} vs {exact}", g.p_hat);
}

#[test]
fn thread_count_does_not_change_estimate() {
    let d = ParametricCost::Exponential { rate: 1.0 };
    let spec = CramerSpec::new(5, 2.0, 50_000).unwrap();
    let a = cramer_probability(&d, &spec, 8).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| cramer_probability(&d, &spec, 8).unwrap());
    assert_eq!(a, b);
}
