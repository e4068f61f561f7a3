use jamdet::detect::*;
use jamdet::nn::ModelKind;
use jamdet::sim::Label;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

fn scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 1..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn roc_is_invariant_to_increasing_transforms(h0 in scores(), h1 in scores()) {
        let f = |x: f64| (x / 10.0).exp() + x;
        let a = roc(&ScoreSet::new(&h0, &h1, ModelKind::Vae).unwrap()).unwrap();
        let t0: Vec<f64> = h0.iter().map(|&x| f(x)).collect();
        let t1: Vec<f64> = h1.iter().map(|&x| f(x)).collect();
        let b = roc(&ScoreSet::new(&t0, &t1, ModelKind::Vae).unwrap()).unwrap();
        let pa: Vec<(f64, f64)> = a.points.iter().map(|p| (p.pfa, p.pd)).collect();
        let pb: Vec<(f64, f64)> = b.points.iter().map(|p| (p.pfa, p.pd)).collect();
        prop_assert_eq!(pa, pb);
        prop_assert!((a.auc - b.auc).abs() < 1e-12);
    }

    #[test]
    fn decisions_follow_transformed_thresholds(xs in scores(), omega in -100.0f64..100.0) {
        let f = |x: f64| x.powi(3) + 2.0 * x;
        let t = Threshold { omega, target_pfa: 0.05, calibration_size: 0 };
        let ft = Threshold { omega: f(omega), ..t };
        for x in xs {
            prop_assert_eq!(decide(x, &t), decide(f(x), &ft));
        }
    }

    #[test]
    fn roc_is_monotone_with_fixed_endpoints(h0 in scores(), h1 in scores()) {
        let curve = roc(&ScoreSet::new(&h0, &h1, ModelKind::Ae).unwrap()).unwrap();
        for w in curve.points.windows(2) {
            prop_assert!(w[1].pfa >= w[0].pfa && w[1].pd >= w[0].pd);
        }
        let first = curve.points.first().unwrap();
        let last = curve.points.last().unwrap();
        prop_assert_eq!((first.pfa, last.pfa, last.pd), (0.0, 1.0, 1.0));
        prop_assert!((0.0..=1.0).contains(&curve.auc));
    }

    #[test]
    fn swapping_labels_reverses_auc(h0 in scores(), h1 in scores()) {
        let a = roc(&ScoreSet::new(&h0, &h1, ModelKind::Vae).unwrap()).unwrap().auc;
        let neg = |v: &Vec<f64>| v.iter().map(|x| -x).collect::<Vec<_>>();
        let b = roc(&ScoreSet::new(&neg(&h0), &neg(&h1), ModelKind::Vae).unwrap()).unwrap().auc;
        let c = roc(&ScoreSet::new(&h1, &h0, ModelKind::Vae).unwrap()).unwrap().auc;
        // Negation leaves ties in place, so these are exact.
        prop_assert!((a + b - 1.0).abs() < 1e-12);
        prop_assert!((a + c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn null_cdf_is_a_distribution_function(xs in prop::collection::vec(-10.0f64..10.0, 50..200), probe in -20.0f64..20.0) {
        for method in [NullMethod::Empirical, NullMethod::Histogram { bins: 20 }] {
            let null = fit_null_with(&xs, method).unwrap();
            let c = null.cdf(probe);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!(null.cdf(probe + 0.5) >= c);
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(null.cdf(lo - 1.0), 0.0);
            prop_assert_eq!(null.cdf(hi + 1.0), 1.0);
        }
    }

    #[test]
    fn plug_in_pfa_is_within_one_over_n(xs in prop::collection::vec(-10.0f64..10.0, 50..300), pfa in 0.01f64..0.5) {
        let t = threshold_for_pfa(&fit_null(&xs).unwrap(), pfa).unwrap();
        let rate = exceedance_rate(&xs, &t);
        prop_assert!((rate - pfa).abs() <= 1.0 / xs.len() as f64 + 1e-12, "rate {} pfa {}", rate, pfa);
    }
}

#[test]
fn calibration_holds_on_fresh_null_samples() {
    let dist = LogNormal::new(5.0, 0.7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n_test = 5000;
    for _ in 0..10 {
        let cal: Vec<f64> = (0..2300).map(|_| dist.sample(&mut rng)).collect();
        let test: Vec<f64> = (0..n_test).map(|_| dist.sample(&mut rng)).collect();
        let t = threshold_for_pfa(&fit_null(&cal).unwrap(), 0.05).unwrap();
        let rate = exceedance_rate(&test, &t);
        // Calibration error plus test sampling error.
        let sd = (0.05 * 0.95 * (1.0 / 2300.0 + 1.0 / n_test as f64)).sqrt();
        assert!((rate - 0.05).abs() < 3.0 * sd, "rate {rate}");
    }
}

#[test]
fn matched_distributions_give_pd_close_to_pfa() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h0: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
    let h1: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
    let pd = pd_at_pfa(&h0, &h1, 0.1).unwrap();
    assert!((pd - 0.1).abs() < 0.015, "pd {pd}");
    let separated: Vec<f64> = h1.iter().map(|x| x + 2.0).collect();
    assert_eq!(pd_at_pfa(&h0, &separated, 0.05).unwrap(), 1.0);
}

#[test]
fn ties_at_the_threshold_are_h0() {
    let t = Threshold { omega: 1.5, target_pfa: 0.1, calibration_size: 10 };
    assert_eq!(decide(1.5, &t), Label::H0);
    assert_eq!(decide(1.5 + 1e-12, &t), Label::H1);
    assert_eq!(decide(-1e300, &t), Label::H0);
}
