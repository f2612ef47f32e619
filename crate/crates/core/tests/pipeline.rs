use apd_core::apstats::rho_scan;
use apd_core::construction::{
    build_pipeline, hoeffding_threshold, level1, round_once, round_to_set, stability_check, verify_five_properties,
    ConstructionParams, IndependenceMode, RoundingReference,
};
use apd_core::Error;

#[test]
fn two_directions_in_five_dimensions_cannot_meet_the_threshold() {
    // |H| = 2 leaves a codimension-2 space of d orthogonal to both directions
    let params = ConstructionParams::new(3, 0.5, 0.1, vec![2, 5], vec![2.0 / 9.0], 1);
    match build_pipeline(&params) {
        Err(Error::SamplingExhausted(diag)) => {
            assert!((diag.best_max_mean_h.unwrap() - 2.0 / 3.0).abs() < 1e-12);
            assert_eq!(diag.dominant(), "progression threshold");
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }

    // without the threshold the construction completes but misses the target
    let mut relaxed = params.clone();
    relaxed.options.sampling.slack = 1.0;
    let levels = build_pipeline(&relaxed).unwrap();
    let report = verify_five_properties(&levels[1], 0.0).unwrap();
    assert!(!report.checks[3].passed);
    assert!((report.max_rho - report.z).abs() < 1e-12);
    assert!(report.checks.iter().enumerate().all(|(i, c)| i == 3 || c.passed), "{report}");
    assert!(!relaxed.in_regime());
}

#[test]
fn working_two_level_configuration() {
    let params = ConstructionParams::new(3, 0.5, 0.02, vec![2, 2], vec![4.0 / 9.0], 1);
    assert!(params.in_regime());
    let levels = build_pipeline(&params).unwrap();
    for state in &levels {
        let report = verify_five_properties(state, 0.0).unwrap();
        assert!(report.all_pass(), "{report}");
    }
    let report = verify_five_properties(&levels[1], 0.0).unwrap();
    assert!((report.margin - 1.52e-4).abs() < 1e-12);
    assert!(stability_check(&levels[1], Some(&levels[0])).unwrap() < 1e-12);
}

#[test]
fn zero_mu_gives_a_cylinder() {
    let params = ConstructionParams::new(3, 0.5, 0.1, vec![2, 2], vec![0.0], 7);
    let levels = build_pipeline(&params).unwrap();
    let (f1, f2) = (&levels[0].f, &levels[1].f);
    for (a, &v) in f2.values().iter().enumerate() {
        assert_eq!(v, f1.values()[a % 9]);
    }
    assert!(levels[1].directions.is_none() || levels[1].h_points.is_empty());
    // d = (0, e) sees the full third moment
    let report = verify_five_properties(&levels[1], 0.0).unwrap();
    assert!(!report.checks[3].passed);
    assert!((report.max_rho - 0.148).abs() < 1e-12);
    assert!(!params.in_regime());
}

#[test]
fn strict_independence() {
    let mut params = ConstructionParams::new(3, 0.5, 0.1, vec![1, 3], vec![1.0 / 3.0], 2);
    params.options.sampling.mode = IndependenceMode::Strict;
    params.options.sampling.slack = 1.0;
    let levels = build_pipeline(&params).unwrap();
    assert!(stability_check(&levels[1], Some(&levels[0])).unwrap() < 1e-12);

    let mut big = ConstructionParams::new(3, 0.5, 0.0, vec![6, 1], vec![1.0 / 729.0], 2);
    big.options.sampling.mode = IndependenceMode::Strict;
    assert!(matches!(build_pipeline(&big), Err(Error::BudgetExceeded { .. })));
}

#[test]
fn rounding_level1() {
    let params = ConstructionParams::new(3, 0.5, 2e-5, vec![8], vec![], 0);
    let state = level1(&params).unwrap();
    let eps = hoeffding_threshold(state.space().size());
    let out = round_to_set(&state.f, eps, 11, 10).unwrap();
    assert!(out.accepted && !out.below_hypothesis);
    assert!(out.density_deviation <= eps && out.max_rho_deviation <= eps);

    let reference = RoundingReference::new(&state.f).unwrap();
    let a = round_once(&state.f, &reference, eps, 11, 3).unwrap();
    let b = round_once(&state.f, &reference, eps, 11, 3).unwrap();
    assert_eq!(a.set, b.set);
    let scan = rho_scan(&apd_core::GFunction::indicator(state.space(), a.set.iter().copied()).unwrap()).unwrap();
    assert!((scan.rho[0] - a.set.len() as f64 / state.space().size() as f64).abs() < 1e-15);
}

#[test]
fn rounding_failure_reports_best_attempt() {
    let state = level1(&ConstructionParams::new(3, 0.5, 0.0, vec![4], vec![], 0)).unwrap();
    match round_to_set(&state.f, 1e-6, 5, 3) {
        Err(Error::RetriesExhausted(best)) => {
            assert_eq!(best.attempts, 3);
            assert!(!best.accepted && best.below_hypothesis);
        }
        other => panic!("expected failure, got {other:?}"),
    }
}
