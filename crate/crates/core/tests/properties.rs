use avwc_core::capacity::*;
use avwc_core::channel::*;
use avwc_core::format::*;
use avwc_core::optim::PrefixSearch;
use avwc_core::order::*;
use proptest::prelude::*;

fn matrix(nx: usize, ny: usize) -> impl Strategy<Value = StochasticMatrix> {
    prop::collection::vec(prop::collection::vec(0.01f64..1.0, ny), nx).prop_map(|rows| {
        let rows = rows.into_iter().map(|r| {
            let t: f64 = r.iter().sum();
            r.into_iter().map(|v| v / t).collect()
        });
        StochasticMatrix::new(rows.collect()).unwrap()
    })
}

fn family(ns: usize, nx: usize, ny: usize) -> impl Strategy<Value = ChannelFamily> {
    prop::collection::vec(matrix(nx, ny), ns).prop_map(|m| ChannelFamily::from_matrices(m).unwrap())
}

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|v| {
        let t: f64 = v.iter().sum::<f64>() + 1e-12;
        let mut q: Vec<f64> = v.iter().map(|a| a / t).collect();
        let rest = 1.0 - q[1..].iter().sum::<f64>();
        q[0] = rest.max(0.0);
        q
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn family_text_round_trips(f in family(3, 2, 3)) {
        let back = parse_family(&write_family(&f)).unwrap();
        prop_assert_eq!(back.num_states(), 3);
        for s in 0..3 {
            prop_assert!(back.matrix(s).max_abs_diff(f.matrix(s)) == 0.0);
        }
    }

    #[test]
    fn mixtures_stay_stochastic(f in family(3, 2, 3), q in simplex(3)) {
        let m = mix(&f, &q).unwrap();
        for x in 0..2 {
            prop_assert!((m.row(x).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(m.row(x).iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn degradation_is_reflexive(w in matrix(2, 3)) {
        prop_assert!(is_degraded(&w, &w, 1e-9).unwrap().degraded);
    }

    #[test]
    fn degradation_is_transitive(w in matrix(2, 3), a in matrix(3, 3), b in matrix(3, 2)) {
        let v = w.compose(&a).unwrap();
        let u = v.compose(&b).unwrap();
        prop_assert!(is_degraded(&v, &w, 1e-7).unwrap().degraded);
        prop_assert!(is_degraded(&u, &v, 1e-7).unwrap().degraded);
        prop_assert!(is_degraded(&u, &w, 1e-7).unwrap().degraded);
    }

    #[test]
    fn degraded_implies_less_noisy(w in matrix(2, 2), a in matrix(2, 2)) {
        let v = w.compose(&a).unwrap();
        prop_assert!(is_less_noisy(&w, &v, 2000).unwrap().less_noisy);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn capacity_ordering(f in family(2, 2, 2)) {
        let rnd = avc_capacity_random(&f);
        let csr = avc_csr_capacity(&f);
        let dmc = f.matrices().iter().map(|w| dmc_capacity(w).lower).fold(f64::INFINITY, f64::min);
        prop_assert!(rnd.value <= csr.value + 1e-6, "{} > {}", rnd.value, csr.value);
        prop_assert!(csr.value <= dmc + 1e-6, "{} > {}", csr.value, dmc);
    }

    #[test]
    fn reported_inputs_reproduce_values(f in family(2, 2, 2)) {
        let rnd = avc_capacity_random(&f);
        let Argmax::Input(p) = &rnd.argmax else { panic!("input argmax expected") };
        prop_assert!((eval_avc_random(&f, p).unwrap() - rnd.raw_value).abs() < 1e-6);
        let csr = avc_csr_capacity(&f);
        let Argmax::Input(p) = &csr.argmax else { panic!("input argmax expected") };
        prop_assert!((eval_avc_csr(&f, p).unwrap() - csr.raw_value).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn secrecy_lower_below_upper(main in family(2, 2, 2), wt in family(2, 2, 2)) {
        let pair = WiretapPair::new(main, wt).unwrap();
        let search = PrefixSearch { starts: 16, ..PrefixSearch::default() };
        let lo = avwc_lower_bound(&pair, &ConstraintSet::AllStates, 2, &search).unwrap();
        let hi = avwc_upper_bound(&pair, false, 2, &search).unwrap();
        prop_assert!(lo.value <= hi.value + 1e-4, "{} > {}", lo.value, hi.value);
        let clo = avwc_csr_lower_bound(&pair, 2, &search).unwrap();
        let chi = avwc_upper_bound(&pair, true, 2, &search).unwrap();
        prop_assert!(clo.value <= chi.value + 1e-4, "{} > {}", clo.value, chi.value);
        prop_assert!(lo.value <= clo.value + 1e-4);
        if let Argmax::Prefix(p) = &lo.argmax {
            let again = eval_avwc_lower(&pair, &ConstraintSet::AllStates, p).unwrap();
            prop_assert!((again - lo.raw_value).abs() < 1e-6);
        }
    }
}
