use proptest::prelude::*;
use shiftstab::io::*;
use shiftstab::{estimate_stability, sweep, CostSample, DualSolution, Error, Stability, DEFAULT_TOL};

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(parse_f64(&format_f64(x)).unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn cost_tables_round_trip(values in prop::collection::vec(-1e12f64..1e12, 1..50)) {
        let s = CostSample::new(values).unwrap();
        let mut buf = Vec::new();
        write_costs(&mut buf, &s).unwrap();
        prop_assert_eq!(read_costs(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn convergence_rows_round_trip(mse in 0.0f64..1.0, me in -1.0f64..1.0, n in 1u64..1_000_000, b in 0u64..10) {
        let rows = vec![ConvergenceRow { n, mse, mean_error: me, sd_error: mse.sqrt(), boundary_count: b }];
        let mut buf = Vec::new();
        write_convergence(&mut buf, &rows).unwrap();
        prop_assert_eq!(read_convergence(buf.as_slice()).unwrap(), rows);
    }
}

#[test]
fn sweep_table_round_trip() {
    let s = CostSample::new(vec![0.0, 1.0, 2.0, 2.0, 5.0]).unwrap();
    let rows: Vec<SweepRow> = sweep(&s, 1.0, 6.0, 11, DEFAULT_TOL)
        .unwrap()
        .into_iter()
        .map(|(y, d)| SweepRow { y, stability: d.stability, lambda_star: d.lambda_star })
        .collect();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows.last().unwrap().stability, Stability::Infinite);
    let mut buf = Vec::new();
    write_sweep(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("y,stability,lambda_star\n"));
    assert_eq!(read_sweep(buf.as_slice()).unwrap(), rows);
}

#[test]
fn path_costs_round_trip() {
    let rows = vec![
        PathCostRow { path_id: 0, policy: "gcmu".into(), scenario: "baseline".into(), cumulative_cost: 1903.76 },
        PathCostRow { path_id: 1, policy: "fifo".into(), scenario: "3".into(), cumulative_cost: 0.1 + 0.2 },
    ];
    let mut buf = Vec::new();
    write_path_costs(&mut buf, &rows).unwrap();
    assert_eq!(read_path_costs(buf.as_slice()).unwrap(), rows);
}

#[test]
fn dual_solution_json_uses_inf_sentinel() {
    let s = CostSample::new(vec![0.0, 2.0]).unwrap();
    let sol = estimate_stability(&s, 2.5, DEFAULT_TOL).unwrap();
    let json = serde_json::to_string(&sol).unwrap();
    assert!(json.contains(r#""stability":"inf""#), "{json}");
    assert!(json.contains(r#""lambda_star":"inf""#), "{json}");
    assert!(json.contains(r#""boundary":"infinite_or_at_max""#), "{json}");
    let back: DualSolution = serde_json::from_str(&json).unwrap();
    assert_eq!(back, sol);
    let finite = estimate_stability(&s, 1.5, DEFAULT_TOL).unwrap();
    let back: DualSolution = serde_json::from_str(&serde_json::to_string(&finite).unwrap()).unwrap();
    assert_eq!(back, finite);
}

#[test]
fn parse_errors_carry_line_numbers() {
    let err = read_sample("group,risk\na,0.1\nb,oops\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    let err = read_sample("x,y\n1,2\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 1, .. }));
    let err = read_costs("cost\n1\n2,3\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
}
