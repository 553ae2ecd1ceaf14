//! The dummy-injection reduction: how often real examples get credited, the
//! fallback branch, privacy of the resulting learner, and its risk.

use std::collections::BTreeMap;

use cca_core::seeding::{run_trials, stream_id, trial_rng};
use cca_core::selection::RandomizedResponse;
use cca_core::semidp::{
    reduction_p, BitRule, DpCompressionScheme, ReductionLearner, SemiDpThresholds, ThresholdClassSpec,
};
use cca_core::{
    approx_indistinguishable, hockey_stick_divergence, Dataset, FiniteDistribution, Hypothesis, HypothesisKey,
    LabeledExample, Point, PrivacyParams,
};
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::error::{config_err, Result};
use crate::output::{Check, Report};

pub type Learner = ReductionLearner<RandomizedResponse, SemiDpThresholds>;

pub fn learner(m: usize, k: usize, eps: f64, p: f64) -> Result<Learner> {
    let spec = ThresholdClassSpec::new(m)?;
    let scheme = DpCompressionScheme {
        selector: RandomizedResponse::new(eps)?,
        bits: BitRule::AwayFrom(m),
        learner: SemiDpThresholds { spec, eps },
        k,
    };
    Ok(ReductionLearner::new(scheme, spec, p)?)
}

/// A sample of size `n` on `x_1..x_{m-1}` cycling through the points, labeled
/// by `h_c` with `c` in the middle of the range.
pub fn demo_sample(n: usize, m: usize) -> Result<Dataset> {
    let c = m.div_ceil(2);
    let pairs: Vec<(usize, u8)> = (0..n).map(|t| {
        let j = t % (m - 1) + 1;
        (j, (j >= c) as u8)
    }).collect();
    Ok(Dataset::grid(m, &pairs)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CreditStats {
    pub runs: u64,
    pub mean_non_dummy: f64,
    pub ci_halfwidth: f64,
    pub fallback_rate: f64,
    pub padded_rate: f64,
    /// Fallback fired exactly on the runs with a credited real example,
    /// and every fallback output was `Constant(1)`.
    pub fallback_consistent: bool,
    pub mean_risk: f64,
}

pub fn credit_stats(l: &Learner, s: &Dataset, target: &Hypothesis, runs: u64, seed: u64) -> Result<CreditStats> {
    let stream = stream_id("reduction/credit");
    let m = l.spec.m();
    let out = run_trials(runs, |t| -> Result<(usize, bool, bool, bool, f64)> {
        let r = l.run_detailed(s, &mut trial_rng(seed, stream, t))?;
        let consistent = r.fallback == (r.non_dummy_credited > 0)
            && (!r.fallback || r.hypothesis == Hypothesis::Constant(1));
        let mut wrong = 0;
        for j in 1..m {
            let x = Point::Grid(j);
            wrong += (r.hypothesis.predict(&x)? != target.predict(&x)?) as usize;
        }
        Ok((r.non_dummy_credited, r.fallback, r.padded, consistent, wrong as f64 / (m - 1) as f64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let n = out.len() as f64;
    let counts: Vec<f64> = out.iter().map(|o| o.0 as f64).collect();
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(CreditStats {
        runs,
        mean_non_dummy: mean,
        ci_halfwidth: 1.96 * (var / n).sqrt(),
        fallback_rate: out.iter().filter(|o| o.1).count() as f64 / n,
        padded_rate: out.iter().filter(|o| o.2).count() as f64 / n,
        fallback_consistent: out.iter().all(|o| o.3),
        mean_risk: out.iter().map(|o| o.4).sum::<f64>() / n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactPrivacy {
    pub pairs: u64,
    pub worst_divergence: f64,
    pub worst_pair: (Vec<(usize, u8)>, Vec<(usize, u8)>),
    pub pass: bool,
}

fn pairs_of(s: &Dataset) -> Vec<(usize, u8)> {
    s.iter().map(|e| (e.grid_index().unwrap_or(0), e.y)).collect()
}

/// Every sample of size `n` on `x_1..x_{m-1}` and every single-example
/// replacement, compared exactly at `params`.
pub fn exact_privacy(l: &Learner, n: usize, params: PrivacyParams) -> Result<ExactPrivacy> {
    let m = l.spec.m();
    let cells = 2 * (m - 1);
    let total = cells.pow(n as u32);
    let decode = |mut code: usize| -> Vec<(usize, u8)> {
        (0..n)
            .map(|_| {
                let c = code % cells;
                code /= cells;
                (c / 2 + 1, (c % 2) as u8)
            })
            .collect()
    };
    let dists = run_trials(total as u64, |code| -> Result<FiniteDistribution<HypothesisKey>> {
        Ok(l.exact_distribution(&Dataset::grid(m, &decode(code as usize))?)?)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut worst: Option<(f64, usize, usize)> = None;
    let mut pairs = 0;
    let mut stride = 1;
    for _ in 0..n {
        for a in 0..total {
            let digit = a / stride % cells;
            for other in digit + 1..cells {
                let b = a + (other - digit) * stride;
                pairs += 1;
                let d = hockey_stick_divergence(&dists[a], &dists[b], params.eps)?
                    .max(hockey_stick_divergence(&dists[b], &dists[a], params.eps)?);
                if worst.is_none_or(|w| d > w.0) {
                    worst = Some((d, a, b));
                }
            }
        }
        stride *= cells;
    }
    let worst = worst.ok_or_else(|| config_err("no neighboring pairs to compare"))?;
    Ok(ExactPrivacy {
        pairs,
        worst_divergence: worst.0,
        worst_pair: (decode(worst.1), decode(worst.2)),
        pass: worst.0 <= params.delta + 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalPair {
    pub left: Vec<(usize, u8)>,
    pub right: Vec<(usize, u8)>,
    pub divergence: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Two-sample comparison of the learner's outputs on neighboring samples at
/// `(eps, delta)` plus the statistical slack.
pub fn empirical_pair(l: &Learner, s: &Dataset, t: &Dataset, params: PrivacyParams, runs: u64, seed: u64) -> Result<EmpiricalPair> {
    let sample = |d: &Dataset, name: &str| -> Result<FiniteDistribution<HypothesisKey>> {
        let stream = stream_id(name);
        let keys = run_trials(runs, |i| l.run(d, &mut trial_rng(seed, stream, i)).map(|h| h.key()))
            .into_iter()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(FiniteDistribution::from_samples(keys)?)
    };
    let p = sample(s, "reduction/privacy/left")?;
    let q = sample(t, "reduction/privacy/right")?;
    let r = approx_indistinguishable(&p, &q, params)?;
    Ok(EmpiricalPair {
        left: pairs_of(s),
        right: pairs_of(t),
        divergence: r.divergence(),
        slack: r.slack,
        pass: r.pass,
    })
}

pub fn run(cfg: &Config) -> Result<Report> {
    let seed = cfg.seed()?;
    let eps = cfg.f64_or("eps", 1.0)?;
    let k = cfg.usize_or("k", 2)?;
    let m = cfg.usize_or("m", 4)?;
    let n = cfg.usize_or("n", 5)?;
    let alpha = cfg.f64_or("alpha", 0.05)?;
    let runs = cfg.usize_or("trials", 100_000)? as u64;
    if m < 3 {
        return Err(config_err("m must be >= 3 so that x_1..x_{m-1} has two points"));
    }
    if n == 0 || k == 0 || k > n {
        return Err(config_err(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let p = match cfg.list("p")? {
        Some(v) if v.len() == 1 => v[0],
        Some(_) => return Err(config_err("p takes a single value")),
        None => reduction_p(k, eps)?,
    };
    let mut l = learner(m, k, eps, p)?;
    let delta = l.scheme.privacy().delta;
    let delta_ok = l.check_delta_regime(n);

    let s = demo_sample(n, m)?;
    let target = Hypothesis::Threshold(m.div_ceil(2));
    let stats = credit_stats(&l, &s, &target, runs, seed)?;
    let credit_bound = 1.0 / 32.0;

    let privacy = PrivacyParams::new(2.0 * eps, 3.0 * delta)?;
    let exact = if n <= 6 { Some(exact_privacy(&l, n, privacy)?) } else { None };
    let mut empirical = Vec::new();
    let mut neighbors: BTreeMap<String, (Dataset, Dataset)> = BTreeMap::new();
    if let Some(e) = &exact {
        neighbors.insert(
            "worst exact pair".into(),
            (Dataset::grid(m, &e.worst_pair.0)?, Dataset::grid(m, &e.worst_pair.1)?),
        );
    }
    neighbors.insert(
        "flip first label".into(),
        (s.clone(), s.replace(0, LabeledExample::grid(1, 1 - s.examples()[0].y))?),
    );
    for (name, (a, b)) in &neighbors {
        let mut r = empirical_pair(&l, a, b, privacy, runs, seed)?;
        r.pass &= a.is_neighbor(b);
        empirical.push((name.clone(), r));
    }

    let mut checks = vec![
        Check::new(
            "non-dummy credit",
            stats.mean_non_dummy <= credit_bound + stats.ci_halfwidth,
            format!("mean {:.5} (+/- {:.5}) vs 1/32", stats.mean_non_dummy, stats.ci_halfwidth),
        ),
        Check::new("fallback branch", stats.fallback_consistent, "fires exactly on credited real examples"),
        Check::new("delta regime", delta_ok, format!("delta {delta} vs 1/(64 n^2)")),
    ];
    if let Some(e) = &exact {
        checks.push(Check::new(
            "exact privacy",
            e.pass,
            format!("{} pairs, worst divergence {:.3e} at 2 eps", e.pairs, e.worst_divergence),
        ));
    }
    for (name, r) in &empirical {
        checks.push(Check::new(
            format!("empirical privacy ({name})"),
            r.pass,
            format!("divergence {:.4} vs 3 delta + slack {:.4}", r.divergence, 3.0 * delta + r.slack),
        ));
    }
    Ok(Report {
        csv: None,
        json: Some(json!({
            "eps": eps,
            "k": k,
            "m": m,
            "n": n,
            "p": p,
            "scheme_delta": delta,
            "delta_limit": 1.0 / (64.0 * (n as f64).powi(2)),
            "non_dummy_bound": credit_bound,
            "credit": stats,
            "risk": {
                "alpha": alpha,
                "mean_risk": stats.mean_risk,
                "alpha_over_p": alpha / p,
            },
            "exact_privacy": exact,
            "empirical_privacy": empirical.iter().map(|(name, r)| json!({"pair": name, "result": r})).collect::<Vec<_>>(),
        })),
        checks,
    })
}
