use rand::Rng;
use serde::Serialize;

use super::{expected_fraction_bounds, BoundForm, Selector};
use crate::distribution::PrivacyParams;
use crate::error::{invalid, Error, Result};
use crate::seeding::{run_trials, stream_id, trial_rng};

/// Bits i.i.d. Bernoulli(`p`) of length `n`, `k` selected per trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BitExperiment {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    /// Privacy level at which the bounds are evaluated.
    pub privacy: PrivacyParams,
    pub trials: u64,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub selector: String,
    pub mean_z: f64,
    /// 1.96 standard errors.
    pub ci_halfwidth: f64,
    pub trials: u64,
    pub tight: (f64, f64),
    pub loose: (f64, f64),
}

/// Monte Carlo estimate of `E[Z]`, the expected fraction of selected
/// positions whose bit is 1. Trial `t` uses the stream
/// `(master_seed, stream_id(selector name), t)`.
pub fn estimate_z(selector: &dyn Selector, exp: &BitExperiment) -> Result<EstimateReport> {
    if exp.trials == 0 {
        return Err(Error::ZeroTrials);
    }
    if exp.k == 0 {
        return Err(invalid("k must be >= 1"));
    }
    if exp.k > exp.n {
        return Err(Error::SelectionTooLarge { k: exp.k, n: exp.n });
    }
    if !(0.0..=1.0).contains(&exp.p) {
        return Err(invalid(format!("p must lie in [0, 1], got {}", exp.p)));
    }
    let stream = stream_id(&selector.name());
    let zs = run_trials(exp.trials, |t| {
        let mut rng = trial_rng(exp.master_seed, stream, t);
        let bits: Vec<bool> = (0..exp.n).map(|_| rng.gen::<f64>() < exp.p).collect();
        selector
            .select(&bits, exp.k, &mut rng)
            .map(|s| s.useful_fraction(&bits))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let count = zs.len() as f64;
    let mean = zs.iter().sum::<f64>() / count;
    let var = if zs.len() > 1 {
        zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let PrivacyParams { eps, delta } = exp.privacy;
    Ok(EstimateReport {
        selector: selector.name(),
        mean_z: mean,
        ci_halfwidth: 1.96 * (var / count).sqrt(),
        trials: exp.trials,
        tight: expected_fraction_bounds(exp.p, eps, delta, exp.n, BoundForm::Tight)?,
        loose: expected_fraction_bounds(exp.p, eps, delta, exp.n, BoundForm::Loose)?,
    })
}
