use proptest::prelude::*;

use gibbs_core::prediction::*;
use gibbs_core::retrodiction::{avoidance_probability, avoidance_probability_generic, RetainedSet};
use gibbs_core::workbench::Dataset;
use gibbs_core::{GibbsModel, SampleSummary};

fn pd_model() -> impl Strategy<Value = GibbsModel> {
    (0.0f64..0.95, -0.9f64..200.0)
        .prop_filter("theta > -sigma", |(s, t)| *t > -*s + 1e-3 && !(*s == 0.0 && *t <= 0.0))
        .prop_map(|(s, t)| {
            if s == 0.0 {
                GibbsModel::dirichlet(t).unwrap()
            } else {
                GibbsModel::poisson_dirichlet(s, t).unwrap()
            }
        })
}

fn frequencies() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..15, 1..25)
}

/// A random composition of `s`, from a cut/no-cut choice between units.
fn composition(s: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(any::<bool>(), s - 1).prop_map(move |cuts| {
        let mut parts = vec![1];
        for cut in cuts {
            if cut {
                parts.push(1);
            } else {
                *parts.last_mut().unwrap() += 1;
            }
        }
        parts
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distributions_are_normalized_and_consistent(model in pd_model(), f in frequencies(), m in 1usize..60) {
        let sample = SampleSummary::from_frequencies(f).unwrap();
        let kl = kl_joint_distribution(&model, &sample, m).unwrap();
        let k = k_distribution(&model, &sample, m).unwrap();
        let l = l_distribution(&model, &sample, m).unwrap();
        let lg = l_distribution_generic(&model, &sample, m).unwrap();
        for d in [&k, &l, &lg] {
            prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let km = kl.marginal_first().unwrap();
        let lm = kl.marginal_second().unwrap();
        for x in 0..=m {
            prop_assert!((km.prob(x) - k.prob(x)).abs() < 1e-10);
            prop_assert!((lm.prob(x) - l.prob(x)).abs() < 1e-10);
            prop_assert!((lg.prob(x) - l.prob(x)).abs() < 1e-10);
        }
        // every new cluster holds at least one new observation
        let ek = k.mean();
        let el = l.mean();
        prop_assert!(ek <= el + 1e-9 && el <= m as f64 + 1e-9);
        let el2 = expected_new_observations(&model, &sample, m).unwrap();
        prop_assert!((el - el2).abs() <= 1e-9 * el2.max(1.0));
    }

    #[test]
    fn hpd_is_the_shortest_interval_holding_the_mass(model in pd_model(), f in frequencies(), m in 1usize..80, level in 0.05f64..0.99) {
        let sample = SampleSummary::from_frequencies(f).unwrap();
        let k = k_distribution(&model, &sample, m).unwrap();
        let h = k.hpd(level).unwrap();
        let mass: f64 = (h.lower..=h.upper).map(|x| k.prob(x)).sum();
        prop_assert!(mass >= level - 1e-9);
        prop_assert!((mass - h.attained_mass).abs() < 1e-9);
        // no interval one point narrower reaches the level
        let width = h.upper - h.lower;
        if width > 0 {
            let mut prefix = vec![0.0];
            for x in 0..=m {
                prefix.push(prefix[x] + k.prob(x));
            }
            for lo in 0..=m + 1 - width {
                prop_assert!(prefix[lo + width] - prefix[lo] < level + 1e-9);
            }
        }
        let wider = k.hpd((level + 1.0) / 2.0).unwrap();
        prop_assert!(wider.upper - wider.lower >= h.upper - h.lower);
    }

    #[test]
    fn avoidance_is_monotone_and_frequency_sufficient(
        model in pd_model(),
        f in prop::collection::vec(1usize..6, 2..12),
        m in 1usize..40,
        seed in any::<u64>(),
    ) {
        let sample = SampleSummary::from_frequencies(f.clone()).unwrap();
        let j = sample.j();
        let first = (seed as usize) % j;
        let mut kept = vec![first];
        let mut last = avoidance_probability(&model, &sample, m, &RetainedSet::new(&sample, kept.clone()).unwrap()).unwrap();
        for i in (0..j).filter(|&i| i != first) {
            kept.push(i);
            let retained = RetainedSet::new(&sample, kept.clone()).unwrap();
            let p = avoidance_probability(&model, &sample, m, &retained).unwrap();
            prop_assert!(p >= last - 1e-12);
            let g = avoidance_probability_generic(&model, &sample, m, &retained).unwrap();
            prop_assert!((p - g).abs() <= 1e-9 * p.max(1e-300) + 1e-13);
            last = p;
        }
        prop_assert!((last - 1.0).abs() < 1e-12);
        // swapping two clusters of equal frequency changes nothing
        if let Some(b) = (0..j).find(|&i| i != first && f[i] == f[first]) {
            let pa = avoidance_probability(&model, &sample, m, &RetainedSet::new(&sample, [first]).unwrap()).unwrap();
            let pb = avoidance_probability(&model, &sample, m, &RetainedSet::new(&sample, [b]).unwrap()).unwrap();
            prop_assert!((pa - pb).abs() <= 1e-14 * pa.max(1e-300));
        }
    }

    #[test]
    fn odds_are_reciprocal(sigma in 0.0f64..0.99, (a, b) in (1usize..30).prop_flat_map(|s| (composition(s), composition(s)))) {
        let ca = NewClusterConfiguration::new(a).unwrap();
        let cb = NewClusterConfiguration::new(b).unwrap();
        let ab = configuration_odds(sigma, &ca, &cb).unwrap();
        let ba = configuration_odds(sigma, &cb, &ca).unwrap();
        prop_assert!((ab * ba - 1.0).abs() < 1e-12);
    }

    #[test]
    fn configuration_text_round_trips(c in prop::collection::vec(1usize..40, 0..12)) {
        let cfg = NewClusterConfiguration::new(c).unwrap();
        let back: NewClusterConfiguration = cfg.to_string().parse().unwrap();
        prop_assert_eq!(back.k(), cfg.k());
        prop_assert_eq!(back.s(), cfg.s());
        prop_assert!((back.log_multiset_realizations() - cfg.log_multiset_realizations()).abs() < 1e-12);
    }

    #[test]
    fn model_text_round_trips(model in pd_model(), gg_sigma in 0.01f64..0.99, beta in 0.01f64..100.0) {
        let back: GibbsModel = model.to_string().parse().unwrap();
        prop_assert_eq!(back, model);
        let gg = GibbsModel::generalized_gamma(gg_sigma, beta).unwrap();
        let back: GibbsModel = gg.to_string().parse().unwrap();
        prop_assert_eq!(back, gg);
    }

    #[test]
    fn datasets_round_trip(f in frequencies()) {
        let d = Dataset::new("prop", SampleSummary::from_frequencies(f).unwrap());
        let back = Dataset::from_json_str(&d.to_json_string()).unwrap();
        prop_assert_eq!(back.n(), d.n());
        prop_assert_eq!(back.multiplicities(), d.multiplicities());
    }

    #[test]
    fn eppf_is_symmetric(model in pd_model(), mut f in frequencies()) {
        let a = model.eppf_log(&f).unwrap().ln();
        f.reverse();
        let b = model.eppf_log(&f).unwrap().ln();
        let s = SampleSummary::from_frequencies(f).unwrap();
        let c = model.eppf_log_multiplicities(s.multiplicities()).unwrap().ln();
        prop_assert!((a - b).abs() < 1e-10 && (a - c).abs() < 1e-10);
    }
}
