use cca_core::audit::{cca_audit, AuditConfig};
use cca_core::compression::{
    as_cca_mechanism, exact_draw_distribution, exact_stability, for_sample_size, stable_boost_compress,
    threshold_compress, BoostConfig, BoostScheme, CompressionScheme, ThresholdScheme, WeakClass,
};
use cca_core::seeding::{trial_rng, SimRng};
use cca_core::{empirical_risk, Dataset, Error, Hypothesis, PrivacyParams};
use proptest::prelude::*;
use rand::SeedableRng;

fn staircase(n: usize, m: usize, cut: usize) -> Dataset {
    let pairs: Vec<(usize, u8)> = (0..n)
        .map(|t| {
            let j = t * m / n + 1;
            (j, (j >= cut) as u8)
        })
        .collect();
    Dataset::grid(m, &pairs).unwrap()
}

/// Realizable grid data: points in `1..=m`, labeled by `h_cut`.
fn realizable(max_n: usize) -> impl Strategy<Value = Dataset> {
    (2usize..=12).prop_flat_map(move |m| {
        (Just(m), 1..=m, prop::collection::vec(1..=m, 1..=max_n))
    })
    .prop_map(|(m, cut, xs)| {
        let pairs: Vec<_> = xs.into_iter().map(|j| (j, (j >= cut) as u8)).collect();
        Dataset::grid(m, &pairs).unwrap()
    })
}

#[test]
fn four_point_threshold_example() {
    let s = Dataset::grid(4, &[(1, 0), (2, 0), (3, 1), (4, 1)]).unwrap();
    let o = threshold_compress(&s).unwrap();
    assert_eq!(o.hypothesis, Hypothesis::Threshold(3));
    assert_eq!(o.credited.iter().copied().collect::<Vec<_>>(), vec![1, 2]);
    let without_first = threshold_compress(&s.omit(0).unwrap()).unwrap().lift_after_omission(0);
    assert_eq!(without_first, o);
}

#[test]
fn all_ones_credits_leftmost() {
    let s = Dataset::grid(6, &[(5, 1), (3, 1), (4, 1)]).unwrap();
    let o = threshold_compress(&s).unwrap();
    assert_eq!(o.hypothesis, Hypothesis::Threshold(3));
    assert_eq!(o.credited.iter().copied().collect::<Vec<_>>(), vec![1]);
}

proptest! {
    #[test]
    fn threshold_is_small_consistent_and_stable(s in realizable(30), picks in prop::collection::vec(0usize..1000, 1..=3)) {
        let o = threshold_compress(&s).unwrap();
        prop_assert!(o.credited.len() <= 2);
        prop_assert_eq!(empirical_risk(&o.hypothesis, &s).unwrap(), 0.0);
        let free: Vec<usize> = (0..s.len()).filter(|i| !o.credited.contains(i)).collect();
        for &i in &free {
            prop_assert_eq!(&threshold_compress(&s.omit(i).unwrap()).unwrap().lift_after_omission(i), &o);
        }
        if !free.is_empty() {
            let mut group: Vec<usize> = picks.iter().map(|p| free[p % free.len()]).collect();
            group.sort_unstable();
            group.dedup();
            let reduced = threshold_compress(&s.omit_many(&group).unwrap()).unwrap();
            prop_assert_eq!(reduced.hypothesis, o.hypothesis.clone());
        }
    }

    #[test]
    fn threshold_exact_audit_has_zero_divergence(s in realizable(10)) {
        let rows = cca_audit(
            &as_cca_mechanism(ThresholdScheme),
            &s,
            &AuditConfig::exact(PrivacyParams::new(0.0, 0.0).unwrap()),
        ).unwrap();
        for r in rows {
            prop_assert!(r.conforms());
            prop_assert!(r.divergence().is_none_or(|d| d == 0.0));
        }
    }

    #[test]
    fn reconstruction_is_deterministic(s in realizable(30)) {
        let sel = s.select(&ThresholdScheme.compress(&s, &mut SimRng::seed_from_u64(0)).unwrap()).unwrap();
        prop_assert_eq!(ThresholdScheme.reconstruct(&sel).unwrap(), ThresholdScheme.reconstruct(&sel).unwrap());
    }

    #[test]
    fn boost_credits_at_most_t_m0(s in realizable(40), seed in any::<u64>()) {
        let cfg = BoostConfig::new(6, 0.125, 8, 0.1).unwrap();
        let mut rng = SimRng::seed_from_u64(seed);
        match stable_boost_compress(&s, WeakClass::Threshold, &cfg, &mut rng) {
            Ok(run) => {
                prop_assert!(run.distinct_credited() <= cfg.size_bound());
                prop_assert_eq!(run.draws.len(), cfg.size_bound());
                let scheme = BoostScheme { class: WeakClass::Threshold, cfg };
                let h = scheme.reconstruct(&s.select(&run.draws).unwrap()).unwrap();
                prop_assert_eq!(&h, &run.output.hypothesis);
                prop_assert_eq!(scheme.reconstruct(&s.select(&run.draws).unwrap()).unwrap(), h);
            }
            Err(Error::WeakLearnerFailed { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn boost_single_example() {
    let s = Dataset::grid(5, &[(3, 1)]).unwrap();
    let cfg = for_sample_size(1, WeakClass::Threshold, 0.1).unwrap();
    let run = stable_boost_compress(&s, WeakClass::Threshold, &cfg, &mut SimRng::seed_from_u64(1)).unwrap();
    assert_eq!(run.output.credited.iter().copied().collect::<Vec<_>>(), vec![0]);
    assert!(run.consistent);
}

#[test]
fn boost_rejects_unrealizable() {
    let s = Dataset::grid(5, &[(2, 1), (4, 0)]).unwrap();
    let cfg = BoostConfig::new(2, 0.125, 1, 0.1).unwrap();
    assert!(stable_boost_compress(&s, WeakClass::Threshold, &cfg, &mut SimRng::seed_from_u64(1)).is_err());
    // Realizable by an interval.
    let s = Dataset::grid(5, &[(1, 0), (2, 1), (4, 0)]).unwrap();
    let cfg = for_sample_size(3, WeakClass::Interval, 0.1).unwrap();
    let r = stable_boost_compress(&s, WeakClass::Interval, &cfg, &mut SimRng::seed_from_u64(1));
    assert!(r.is_ok(), "{r:?}");
}

#[test]
fn boost_consistent_in_most_runs() {
    let s = staircase(200, 1000, 400);
    let xi = 0.1;
    let cfg = for_sample_size(200, WeakClass::Threshold, xi).unwrap();
    let runs = 300;
    let ok = (0..runs)
        .filter(|&t| {
            stable_boost_compress(&s, WeakClass::Threshold, &cfg, &mut trial_rng(7, 0, t))
                .is_ok_and(|r| r.consistent)
        })
        .count();
    assert!(ok as f64 >= (1.0 - 2.0 * xi) * runs as f64, "{ok}/{runs}");
}

#[test]
fn exact_draw_law_matches_sampling() {
    let s = staircase(4, 4, 3);
    let cfg = BoostConfig::new(2, 0.125, 1, 0.1).unwrap();
    let exact = exact_draw_distribution(&s, WeakClass::Threshold, &cfg).unwrap();
    let total: f64 = exact.iter().map(|(_, p)| p).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let runs = 200_000u64;
    let mut counts = std::collections::BTreeMap::new();
    for t in 0..runs {
        let d = stable_boost_compress(&s, WeakClass::Threshold, &cfg, &mut trial_rng(3, 1, t))
            .ok()
            .map(|r| r.draws);
        *counts.entry(d).or_insert(0u64) += 1;
    }
    for (k, p) in exact.iter() {
        let f = *counts.get(k).unwrap_or(&0) as f64 / runs as f64;
        let sd = (p * (1.0 - p) / runs as f64).sqrt();
        assert!((f - p).abs() <= 4.0 * sd + 1e-12, "{k:?}: {f} vs {p}");
    }
    assert!(counts.keys().all(|k| exact.prob(k) > 0.0));
}

#[test]
fn one_round_is_exactly_stable() {
    let s = staircase(8, 8, 5);
    let cfg = BoostConfig::new(1, 0.125, 2, 0.1).unwrap();
    for i in 0..s.len() {
        let r = exact_stability(&s, WeakClass::Threshold, &cfg, i).unwrap();
        assert!(r.total_variation() < 1e-12, "index {i}: {}", r.total_variation());
    }
}

#[test]
fn later_rounds_are_not_exactly_stable() {
    // Per-round renormalization makes the conditional law path dependent.
    let s = staircase(8, 8, 5);
    let cfg = BoostConfig::new(2, 0.125, 1, 0.1).unwrap();
    let worst = (0..s.len())
        .map(|i| exact_stability(&s, WeakClass::Threshold, &cfg, i).unwrap().total_variation())
        .fold(0.0, f64::max);
    assert!(worst > 1e-3, "{worst}");
}
