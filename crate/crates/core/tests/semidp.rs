use cca_core::seeding::{trial_rng, SimRng};
use cca_core::selection::{ObliviousSelector, RandomizedResponse};
use cca_core::semidp::{
    dummy_mixture, exp_mech_distribution, exp_mech_learn_thresholds, make_cca_from_semidp, reduction_p,
    semidp_distribution, BitRule, DpCompressionScheme, ReductionLearner, SemiDpThresholds, ThresholdClassSpec,
};
use cca_core::{
    hockey_stick_divergence, population_risk, CreditMechanism, Dataset, Error, Hypothesis, HypothesisKey,
    LabeledExample,
};
use proptest::prelude::*;
use rand::SeedableRng;

fn all_datasets(n: usize, m: usize) -> Vec<Vec<(usize, u8)>> {
    let cells = 2 * m;
    (0..cells.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let c = code % cells;
                    code /= cells;
                    (c / 2 + 1, (c % 2) as u8)
                })
                .collect()
        })
        .collect()
}

#[test]
fn exp_mech_closed_form() {
    let spec = ThresholdClassSpec::new(5).unwrap();
    let s = Dataset::grid(5, &[(1, 0), (2, 1), (3, 1), (3, 0), (5, 1)]).unwrap();
    let eps: f64 = 0.7;
    // Errors of h_1..h_5 counted by hand.
    let errs: [f64; 5] = [2.0, 1.0, 2.0, 2.0, 2.0];
    let z: f64 = errs.iter().map(|e| (-eps * e / 2.0).exp()).sum();
    let d = exp_mech_distribution(&s, &spec, eps).unwrap();
    for (i, e) in errs.iter().enumerate() {
        let want = (-eps * e / 2.0).exp() / z;
        assert!((d.prob(&HypothesisKey::Threshold(i + 1)) - want).abs() < 1e-14);
    }
    let runs = 200_000u64;
    let mut hits = [0u64; 5];
    for t in 0..runs {
        match exp_mech_learn_thresholds(&s, &spec, eps, &mut trial_rng(5, 0, t)).unwrap() {
            Hypothesis::Threshold(i) => hits[i - 1] += 1,
            other => panic!("{other:?}"),
        }
    }
    for (i, e) in errs.iter().enumerate() {
        let p = (-eps * e / 2.0).exp() / z;
        let f = hits[i] as f64 / runs as f64;
        assert!((f - p).abs() <= 3.0 * (p * (1.0 - p) / runs as f64).sqrt());
    }
}

/// Worst divergence at `e` over every private sample of size 5 on `m = 4`
/// and every replacement of one of its examples.
fn worst_neighbor_divergence(public: &Dataset, eps: f64, e: f64) -> f64 {
    let spec = ThresholdClassSpec::new(4).unwrap();
    let mut worst: f64 = 0.0;
    for pairs in all_datasets(5, 4) {
        let s = Dataset::grid(4, &pairs).unwrap();
        let ds = semidp_distribution(public, &s, &spec, eps).unwrap();
        for i in 0..5 {
            for j in 1..=4 {
                for y in 0..=1 {
                    let t = s.replace(i, LabeledExample::grid(j, y)).unwrap();
                    let dt = semidp_distribution(public, &t, &spec, eps).unwrap();
                    worst = worst.max(hockey_stick_divergence(&ds, &dt, e).unwrap());
                }
            }
        }
    }
    worst
}

#[test]
fn semidp_neighbors_private_at_eps_only() {
    let eps = 1.0;
    let none = Dataset::empty(Some(4));
    assert!(worst_neighbor_divergence(&none, eps, eps) <= 1e-12);
    assert!(worst_neighbor_divergence(&none, eps, eps - 0.1) > 0.0);
    let public = Dataset::grid(4, &[(1, 0)]).unwrap();
    assert!(worst_neighbor_divergence(&public, eps, eps) <= 1e-12);
}

#[test]
fn exp_mech_six_points() {
    let spec = ThresholdClassSpec::new(4).unwrap();
    let eps = 2.0;
    let s = Dataset::grid(4, &[(1, 0), (2, 0), (3, 1), (4, 1), (2, 0), (3, 1)]).unwrap();
    // Errors of h_1..h_4: h_3 is consistent.
    let errs = [3.0f64, 2.0, 0.0, 2.0];
    let z: f64 = errs.iter().map(|e| (-eps * e / 2.0).exp()).sum();
    let runs = 1_000_000u64;
    let mut hits = [0u64; 4];
    for t in 0..runs {
        if let Hypothesis::Threshold(i) = exp_mech_learn_thresholds(&s, &spec, eps, &mut trial_rng(6, 0, t)).unwrap() {
            hits[i - 1] += 1;
        }
    }
    let d = exp_mech_distribution(&s, &spec, eps).unwrap();
    for (i, e) in errs.iter().enumerate() {
        let p = (-eps * e / 2.0).exp() / z;
        assert!((d.prob(&HypothesisKey::Threshold(i + 1)) - p).abs() < 1e-14);
        let f = hits[i] as f64 / runs as f64;
        assert!((f - p).abs() <= 3.0 * (p * (1.0 - p) / runs as f64).sqrt(), "h_{}: {f} vs {p}", i + 1);
    }
    for i in 0..s.len() {
        for j in 1..=4 {
            for y in 0..=1 {
                let t = s.replace(i, LabeledExample::grid(j, y)).unwrap();
                let dt = exp_mech_distribution(&t, &spec, eps).unwrap();
                assert!(hockey_stick_divergence(&d, &dt, eps).unwrap() <= 1e-12);
                assert!(hockey_stick_divergence(&dt, &d, eps).unwrap() <= 1e-12);
            }
        }
    }
}

#[test]
fn exp_mech_limits() {
    let spec = ThresholdClassSpec::new(4).unwrap();
    let s = Dataset::grid(4, &[(1, 0), (3, 1)]).unwrap();
    let d = exp_mech_distribution(&s, &spec, f64::INFINITY).unwrap();
    assert_eq!(d.prob(&HypothesisKey::Threshold(2)), 0.5);
    assert_eq!(d.prob(&HypothesisKey::Threshold(3)), 0.5);
    let d = exp_mech_distribution(&s, &spec, 0.0).unwrap();
    assert!(d.iter().all(|(_, p)| (p - 0.25).abs() < 1e-15));
}

#[test]
fn public_examples_restrict_candidates() {
    let spec = ThresholdClassSpec::new(6).unwrap();
    let public = Dataset::grid(6, &[(2, 0), (4, 1)]).unwrap();
    let private = Dataset::grid(6, &[(1, 1)]).unwrap();
    let d = semidp_distribution(&public, &private, &spec, 2.0).unwrap();
    let support: Vec<_> = d.support().cloned().collect();
    assert_eq!(support, vec![HypothesisKey::Threshold(3), HypothesisKey::Threshold(4)]);
    let bad = Dataset::grid(6, &[(4, 0), (2, 1)]).unwrap();
    assert_eq!(
        semidp_distribution(&bad, &private, &spec, 2.0).unwrap_err(),
        Error::PublicDataInconsistent
    );
}

#[test]
fn oblivious_compression_is_public_prefix() {
    let spec = ThresholdClassSpec::new(4).unwrap();
    let learner = SemiDpThresholds { spec, eps: 1.0 };
    let scheme = DpCompressionScheme {
        selector: ObliviousSelector,
        bits: BitRule::LabelIsOne,
        learner,
        k: 2,
    };
    let prefix = make_cca_from_semidp(learner, 2);
    for pairs in all_datasets(5, 4).into_iter().step_by(97) {
        let s = Dataset::grid(4, &pairs).unwrap();
        match (scheme.exact_distribution(&s), prefix.exact_distribution(&s)) {
            (Ok(a), Ok(b)) => {
                assert!(a.support().eq(b.support()));
                for (k, p) in a.iter() {
                    assert!((p - b.prob(k)).abs() < 1e-15);
                }
            }
            (Err(a), Err(b)) => assert_eq!(a, b),
            other => panic!("{other:?}"),
        }
    }
}

fn learner(k: usize, eps: f64, p: f64, m: usize) -> ReductionLearner<RandomizedResponse, SemiDpThresholds> {
    let spec = ThresholdClassSpec::new(m).unwrap();
    let scheme = DpCompressionScheme {
        selector: RandomizedResponse::new(eps).unwrap(),
        bits: BitRule::AwayFrom(m),
        learner: SemiDpThresholds { spec, eps },
        k,
    };
    ReductionLearner::new(scheme, spec, p).unwrap()
}

#[test]
fn fallback_iff_real_example_credited() {
    let l = learner(2, 1.0, 0.3, 6);
    let s = Dataset::grid(6, &[(1, 0), (2, 0), (4, 1), (5, 1), (3, 0), (4, 1)]).unwrap();
    let mut fired = 0;
    for t in 0..5000 {
        let r = l.run_detailed(&s, &mut trial_rng(8, 0, t)).unwrap();
        assert_eq!(r.fallback, r.non_dummy_credited > 0);
        if r.fallback {
            fired += 1;
            assert_eq!(r.hypothesis, Hypothesis::Constant(1));
        } else {
            assert!(!matches!(r.hypothesis, Hypothesis::Threshold(i) if i >= 6));
        }
    }
    assert!(fired > 0);
}

#[test]
fn oblivious_first_slot_always_falls_back_at_full_rate() {
    let spec = ThresholdClassSpec::new(4).unwrap();
    let scheme = DpCompressionScheme {
        selector: ObliviousSelector,
        bits: BitRule::AwayFrom(4),
        learner: SemiDpThresholds { spec, eps: 1.0 },
        k: 1,
    };
    let l = ReductionLearner::new(scheme, spec, 1.0).unwrap();
    let s = Dataset::grid(4, &[(2, 1), (1, 0)]).unwrap();
    let d = l.exact_distribution(&s).unwrap();
    assert_eq!(d.prob(&HypothesisKey::Constant(1)), 1.0);
}

#[test]
fn non_dummy_credit_is_rare() {
    let eps = 1.0;
    let k = 2;
    let l = learner(k, eps, reduction_p(k, eps).unwrap(), 8);
    let pairs: Vec<(usize, u8)> = (0..40).map(|t| (t % 7 + 1, (t % 7 >= 3) as u8)).collect();
    let s = Dataset::grid(8, &pairs).unwrap();
    let runs = 20_000;
    let total: usize = (0..runs)
        .map(|t| l.run_detailed(&s, &mut trial_rng(4, 0, t)).unwrap().non_dummy_credited)
        .sum();
    let mean = total as f64 / runs as f64;
    assert!(mean <= 1.0 / 32.0, "{mean}");
}

#[test]
fn reduction_is_reproducible() {
    let l = learner(2, 1.0, 0.2, 5);
    let s = Dataset::grid(5, &[(1, 0), (3, 1), (2, 0)]).unwrap();
    let a: Vec<_> = (0..50).map(|t| l.run(&s, &mut trial_rng(1, 2, t)).unwrap()).collect();
    let b: Vec<_> = (0..50).map(|t| l.run(&s, &mut trial_rng(1, 2, t)).unwrap()).collect();
    assert_eq!(a, b);
    let mut rng = SimRng::seed_from_u64(0);
    assert!(l.run(&Dataset::grid(5, &[(5, 1)]).unwrap(), &mut rng).is_err());
}

#[test]
fn reduction_exact_law_is_normalized_and_restricted() {
    let l = learner(2, 1.0, 0.4, 4);
    let s = Dataset::grid(4, &[(1, 0), (3, 1), (2, 0), (3, 1), (1, 0)]).unwrap();
    let d = l.exact_distribution(&s).unwrap();
    let total: f64 = d.iter().map(|(_, p)| p).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(d.support().all(|k| !matches!(k, HypothesisKey::Threshold(i) if *i >= 4)));
}

proptest! {
    #[test]
    fn mixture_scales_risk(
        m in 2usize..=10,
        raw in prop::collection::vec((1usize..10, 0u8..=1, 0.01..1.0f64), 1..8),
        p in 0.0..=1.0f64,
        i in 1usize..=10,
    ) {
        let spec = ThresholdClassSpec::new(m).unwrap();
        let z: f64 = raw.iter().map(|r| r.2).sum();
        let dist: Vec<(LabeledExample, f64)> = raw
            .iter()
            .map(|&(j, y, w)| (LabeledExample::grid((j - 1) % (m - 1) + 1, y), w / z))
            .collect();
        let mixed = dummy_mixture(&dist, &spec, p).unwrap();
        let h = Hypothesis::Threshold((i - 1) % m + 1);
        let restricted = match h {
            Hypothesis::Threshold(t) if t == m => Hypothesis::Constant(0),
            ref other => other.clone(),
        };
        let lhs = population_risk(&h, &mixed).unwrap();
        let rhs = p * population_risk(&restricted, &dist).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }
}
