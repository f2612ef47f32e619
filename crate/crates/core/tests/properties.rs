use apd_core::apstats::{lambda3, lambda3_spectral, rho_scan};
use apd_core::construction::{
    build_pipeline, hoeffding_threshold, level1, stability_check, ConstructionParams, IntervalGadget,
};
use apd_core::construction::plan_lower_schedule_log;
use apd_core::fourier::{average_over, dft, idft};
use apd_core::increment::{increment_step, upper_height, TowerValue};
use apd_core::oracle::naive_lambda;
use apd_core::regularity::{floor_inv_square, verify_counting, weak_regular_subspace};
use apd_core::{GFunction, Point, Space, Subspace};
use proptest::prelude::*;

/// A space with at most `max_size` points.
fn small_space(max_size: usize) -> impl Strategy<Value = Space> {
    prop_oneof![Just(3u32), Just(5), Just(7)].prop_flat_map(move |p| {
        let mut top = 1;
        while (p as usize).pow(top + 1) <= max_size {
            top += 1;
        }
        (1..=top).prop_map(move |n| Space::new(p, n).unwrap())
    })
}

fn function_on(space: Space) -> impl Strategy<Value = GFunction> {
    prop::collection::vec(0.0f64..=1.0, space.size()).prop_map(move |v| GFunction::new(space, v).unwrap())
}

fn small_function(max_size: usize) -> impl Strategy<Value = GFunction> {
    small_space(max_size).prop_flat_map(function_on)
}

fn ternary_function(max_n: u32) -> impl Strategy<Value = GFunction> {
    (1..=max_n).prop_flat_map(|n| function_on(Space::new(3, n).unwrap()))
}

fn subspace_of(space: Space) -> impl Strategy<Value = Subspace> {
    prop::collection::vec(0..space.size(), 0..=space.n() as usize + 1)
        .prop_map(move |ts| Subspace::from_constraints(space, &ts.into_iter().map(Point).collect::<Vec<_>>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(f in small_function(729)) {
        let back = idft(&dft(&f)).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval(f in small_function(729)) {
        prop_assert!((dft(&f).energy() - f.mean_square()).abs() < 1e-12);
    }

    #[test]
    fn difference_densities_symmetric_and_average_to_lambda(f in small_function(729)) {
        let scan = rho_scan(&f).unwrap();
        let s = f.space();
        for d in s.points() {
            prop_assert!((scan.rho[d.0] - scan.rho[s.neg(d).0]).abs() < 1e-14);
        }
        prop_assert!((scan.lambda - lambda3(&f).unwrap()).abs() < 1e-12);
        prop_assert!((scan.z - f.mean_cube()).abs() < 1e-14);
    }

    #[test]
    fn spectral_count_matches_direct_count(f in small_function(243)) {
        prop_assert!((lambda3(&f).unwrap() - naive_lambda(&f).unwrap()).abs() < 1e-12);
        prop_assert!((lambda3_spectral(&f, &f, &f).unwrap() - naive_lambda(&f).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn regularity_certificate(f in ternary_function(5), delta in 0.05f64..0.5, pad: bool) {
        let cert = weak_regular_subspace(&f, delta, pad).unwrap();
        prop_assert!(cert.is_consistent());
        prop_assert!(cert.achieved_gap <= delta + 1e-12);
        prop_assert!(cert.codim_actual <= floor_inv_square(delta).max(cert.large_spectrum.len()));
        let g = average_over(&f, &cert.subspace).unwrap();
        prop_assert!(verify_counting(&f, &g).unwrap().holds());
    }

    #[test]
    fn counting_bound_for_coset_averages(
        (f, h) in ternary_function(4).prop_flat_map(|f| { let s = f.space(); (Just(f), subspace_of(s)) })
    ) {
        let g = average_over(&f, &h).unwrap();
        let check = verify_counting(&f, &g).unwrap();
        prop_assert!(check.holds(), "{check:?}");
    }

    #[test]
    fn increment_step_inequality(f in ternary_function(4), frac in 0.1f64..0.9, eta in 0.2f64..0.6) {
        let alpha = f.density();
        let nontrivial = rho_scan(&f).unwrap();
        let n = f.space().size() as f64;
        let lambda = (nontrivial.lambda * n - nontrivial.z) / (n - 1.0);
        let room = alpha.powi(3) - lambda;
        if room > 1e-9 {
            if let Ok((h, rec)) = increment_step(&f, &Subspace::full(f.space()), room * frac, eta) {
                prop_assert!(rec.inequality_holds(), "{rec:?}");
                prop_assert!(rec.codim_bound_holds());
                prop_assert_eq!(h.codim(), rec.codim_after);
            }
        }
    }

    #[test]
    fn subspace_intersection(
        (s, a, b) in small_space(243).prop_flat_map(|s| (Just(s), subspace_of(s), subspace_of(s)))
    ) {
        let both = a.intersect(&b).unwrap();
        prop_assert!(both.codim() <= a.codim() + b.codim());
        for x in s.points() {
            prop_assert_eq!(both.contains(x), a.contains(x) && b.contains(x));
        }
    }

    #[test]
    fn coset_partition(
        (s, h) in small_space(243).prop_flat_map(|s| (Just(s), subspace_of(s)))
    ) {
        let cosets = h.cosets().unwrap();
        prop_assert_eq!(cosets.len() * cosets.coset_size(), s.size());
        prop_assert_eq!(cosets.coset_size(), h.size());
        let mut seen = vec![0u8; s.size()];
        for (j, members) in cosets.iter().enumerate() {
            let rep = cosets.representatives()[j];
            for &x in members {
                seen[x.0] += 1;
                prop_assert_eq!(cosets.coset_of(x), j);
                prop_assert!(h.contains(s.sub(x, rep)));
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn level1_closed_forms(
        p in prop_oneof![Just(3u32), Just(5)],
        m1 in 1u32..=2,
        alpha in 0.05f64..=0.5,
        frac in 0.0f64..=1.0,
    ) {
        let n1 = (p as usize).pow(m1);
        let eta = frac.min(0.3) / (n1 as f64 - 1.0);
        let params = ConstructionParams::new(p, alpha, eta, vec![m1], vec![], 0);
        prop_assume!(params.validate().is_ok());
        let state = level1(&params).unwrap();
        let desc = params.descriptor(0);
        let (low, base) = (desc.low(), desc.base());
        let scan = rho_scan(&state.f).unwrap();
        let nonzero = (3.0 * low * base * base + (n1 as f64 - 3.0) * base.powi(3)) / n1 as f64;
        prop_assert!((state.f.density() - alpha).abs() < 1e-12);
        prop_assert!((scan.z - desc.z1()).abs() < 1e-12);
        for d in 1..n1 {
            prop_assert!((scan.rho[d] - nonzero).abs() < 1e-12);
        }
        prop_assert!(nonzero <= alpha.powi(3) + 1e-15);
    }

    #[test]
    fn interval_gadget(p in prop::sample::select(vec![3u32, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47])) {
        let g = IntervalGadget::new(p).unwrap();
        prop_assert!(g.check().is_ok());
        prop_assert_eq!(g.inclusion_exclusion_count(), g.total_count() as i64);
        prop_assert!((g.zeta() - g.len() as f64 / p as f64).abs() < 1e-15);
        prop_assert!(g.zeta() >= 2.0 / 3.0);
    }

    #[test]
    fn schedule_length_grows_as_epsilon_shrinks(p in prop::sample::select(vec![3u32, 5, 7]), ln_eps in -3000.0f64..-1.0) {
        let a = plan_lower_schedule_log(p, ln_eps).unwrap();
        let b = plan_lower_schedule_log(p, ln_eps - std::f64::consts::LN_2).unwrap();
        prop_assert!(b.s >= a.s);
        prop_assert!(b.m1 >= a.m1);
    }

    #[test]
    fn upper_height_closed_form(alpha in 0.1f64..=1.0, k in 1u32..40) {
        let room = alpha - alpha.powi(3);
        prop_assume!(room > 1e-6);
        let eps = room / 2f64.powi(k as i32);
        prop_assert_eq!(upper_height(alpha, eps).unwrap(), k + 5);
        prop_assert_eq!(upper_height(alpha, eps * 0.9).unwrap(), k + 6);
    }

    #[test]
    fn tower_order(base in prop::sample::select(vec![3u32, 5, 7]), h in 0u32..5, top in 1.0f64..1e6) {
        let t = TowerValue::tower(base, h, top);
        let bigger = TowerValue::tower(base, h, top * 1.5);
        let taller = TowerValue::tower(base, h + 1, top);
        prop_assert!(t < bigger);
        prop_assert!(t < taller);
        prop_assert!(bigger > t);
    }

    #[test]
    fn hoeffding_threshold_decreases(n in 1usize..20) {
        prop_assert!(hoeffding_threshold(3usize.pow(n as u32 + 1)) < hoeffding_threshold(3usize.pow(n as u32)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cylinder_stability(m1 in 1u32..=2, m2 in 2u32..=3, k in 1usize..=4, seed: u64) {
        let n1 = 3usize.pow(m1);
        let k = k.min(n1 - 1);
        let mut params = ConstructionParams::new(3, 0.5, 0.01, vec![m1, m2], vec![k as f64 / n1 as f64], seed);
        params.options.sampling.slack = 1.0;
        params.options.sampling.max_attempts = 2_000;
        if let Ok(levels) = build_pipeline(&params) {
            let dev = stability_check(&levels[1], Some(&levels[0])).unwrap();
            prop_assert!(dev < 1e-12, "deviation {dev}");
            prop_assert!((levels[1].f.density() - 0.5).abs() < 1e-12);
        }
    }
}
