//! The stability property of a randomized compression function: the law of
//! `kappa(S_{-i})` against the law of `kappa(S)` conditioned on `i` not being
//! drawn.
//!
//! A weak-learner failure is kept as its own outcome on both sides; it draws
//! nothing, so it survives the conditioning.

use serde::Serialize;

use super::boost::{exact_draw_distribution, stable_boost_compress, BoostConfig, WeakClass};
use crate::data::Dataset;
use crate::distribution::{approx_indistinguishable, ClosenessReport, FiniteDistribution, PrivacyParams};
use crate::error::{Error, Result};
use crate::seeding::{run_trials, stream_id, trial_rng};

type Draws = Option<Vec<usize>>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub index: usize,
    /// `Pr[i not drawn]` under `kappa(S)`.
    pub survival: f64,
    /// Runs left after conditioning; `None` in exact mode.
    pub conditional_samples: Option<u64>,
    /// Closeness at `eps = 0, delta = 0`; in Monte Carlo mode the verdict
    /// allows the statistical slack.
    pub report: ClosenessReport,
}

impl StabilityReport {
    pub fn total_variation(&self) -> f64 {
        self.report.divergence()
    }
}

fn avoids(d: &Draws, i: usize) -> bool {
    d.as_ref().is_none_or(|v| !v.contains(&i))
}

fn lift(d: &Draws, i: usize) -> Draws {
    d.as_ref()
        .map(|v| v.iter().map(|&j| if j >= i { j + 1 } else { j }).collect())
}

fn exact_zero() -> PrivacyParams {
    PrivacyParams { eps: 0.0, delta: 0.0 }
}

/// Exact comparison by full enumeration of the draw sequences.
pub fn exact_stability(
    data: &Dataset,
    class: WeakClass,
    cfg: &BoostConfig,
    i: usize,
) -> Result<StabilityReport> {
    let reduced = data.omit(i)?;
    let full = exact_draw_distribution(data, class, cfg)?;
    let survival = full.mass_where(|d| avoids(d, i));
    let conditioned = full
        .condition(|d| avoids(d, i))
        .ok_or_else(|| Error::InvalidDistribution(format!("position {i} is drawn in every run")))?;
    let omitted = exact_draw_distribution(&reduced, class, cfg)?.map(|d| lift(d, i));
    Ok(StabilityReport {
        index: i,
        survival,
        conditional_samples: None,
        report: approx_indistinguishable(&conditioned, &omitted, exact_zero())?,
    })
}

fn sample(data: &Dataset, class: WeakClass, cfg: &BoostConfig, runs: u64, seed: u64, stream: u64) -> Vec<Draws> {
    run_trials(runs, |t| {
        let mut rng = trial_rng(seed, stream, t);
        stable_boost_compress(data, class, cfg, &mut rng).ok().map(|r| r.draws)
    })
}

/// Two-sample comparison over `runs` seeded runs per side.
pub fn empirical_stability(
    data: &Dataset,
    class: WeakClass,
    cfg: &BoostConfig,
    i: usize,
    runs: u64,
    seed: u64,
) -> Result<StabilityReport> {
    if runs == 0 {
        return Err(Error::ZeroTrials);
    }
    let reduced = data.omit(i)?;
    // Fail fast on inputs the scheme rejects outright.
    stable_boost_compress(data, class, cfg, &mut trial_rng(seed, 0, 0))?;
    let base = stream_id("stability/full");
    let full = sample(data, class, cfg, runs, seed, base);
    let kept: Vec<Draws> = full.into_iter().filter(|d| avoids(d, i)).collect();
    if kept.is_empty() {
        return Err(Error::InvalidDistribution(format!(
            "position {i} was drawn in all {runs} runs"
        )));
    }
    let kept_n = kept.len() as u64;
    let omitted = sample(&reduced, class, cfg, runs, seed, stream_id("stability/omitted") ^ i as u64);
    let p = FiniteDistribution::from_samples(kept)?;
    let q = FiniteDistribution::from_samples(omitted.iter().map(|d| lift(d, i)))?;
    Ok(StabilityReport {
        index: i,
        survival: kept_n as f64 / runs as f64,
        conditional_samples: Some(kept_n),
        report: approx_indistinguishable(&p, &q, exact_zero())?,
    })
}
