//! Counterfactual credit attribution audit.
//!
//! For each audited position `i`, either `i` is credited with probability 1,
//! or the law of `M(S)` conditioned on `i` not being credited must be
//! `(eps, delta)`-close to the law of `M(S_{-i})`. Outputs on `S_{-i}` are
//! re-indexed so their credited positions refer to `S`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::data::Dataset;
use crate::distribution::{approx_indistinguishable, ClosenessReport, FiniteDistribution, PrivacyParams};
use crate::error::{invalid, Error, Result};
use crate::mechanism::{CreditMechanism, OutputKey};
use crate::seeding::{run_trials, stream_id, trial_rng};

/// Conditional samples required before a Monte Carlo comparison is made.
pub const MIN_CONDITIONAL_SAMPLES: u64 = 100;

/// Exact-mode tolerance for "credited with probability 1".
pub const ALWAYS_CREDITED_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AuditMode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum AuditIndices {
    All,
    List(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditConfig {
    /// Runs per arm in Monte Carlo mode.
    pub trials: u64,
    pub privacy: PrivacyParams,
    pub indices: AuditIndices,
    pub mode: AuditMode,
    pub seed: u64,
}

impl AuditConfig {
    pub fn exact(privacy: PrivacyParams) -> Self {
        Self {
            trials: 0,
            privacy,
            indices: AuditIndices::All,
            mode: AuditMode::Exact,
            seed: 0,
        }
    }

    pub fn monte_carlo(privacy: PrivacyParams, trials: u64, seed: u64) -> Self {
        Self {
            trials,
            privacy,
            indices: AuditIndices::All,
            mode: AuditMode::MonteCarlo,
            seed,
        }
    }

    pub fn with_indices(mut self, indices: Vec<usize>) -> Self {
        self.indices = AuditIndices::List(indices);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AuditStatus {
    /// `i` was credited in every run (every outcome, in exact mode).
    AlwaysCredited,
    Pass,
    Fail,
    InsufficientConditioningMass,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexAudit {
    pub index: usize,
    pub status: AuditStatus,
    /// `Pr[i in R]`, exact or estimated.
    pub credit_probability: f64,
    /// Monte Carlo only: `1 - 1/N` when every run credited `i`.
    pub credit_lower_bound: Option<f64>,
    pub conditional_samples: Option<u64>,
    pub report: Option<ClosenessReport>,
}

impl IndexAudit {
    /// Pass or vacuous conformance.
    pub fn conforms(&self) -> bool {
        matches!(self.status, AuditStatus::Pass | AuditStatus::AlwaysCredited)
    }

    pub fn divergence(&self) -> Option<f64> {
        self.report.as_ref().map(ClosenessReport::divergence)
    }
}

fn audited_indices(cfg: &AuditConfig, n: usize) -> Result<Vec<usize>> {
    match &cfg.indices {
        AuditIndices::All => Ok((0..n).collect()),
        AuditIndices::List(v) => {
            if let Some(&bad) = v.iter().find(|&&i| i >= n) {
                return Err(invalid(format!(
                    "audit index {bad} out of range for dataset of length {n}"
                )));
            }
            Ok(v.clone())
        }
    }
}

pub fn cca_audit(
    mechanism: &dyn CreditMechanism,
    data: &Dataset,
    cfg: &AuditConfig,
) -> Result<Vec<IndexAudit>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let indices = audited_indices(cfg, data.len())?;
    match cfg.mode {
        AuditMode::Exact => exact_audit(mechanism, data, cfg, &indices),
        AuditMode::MonteCarlo => monte_carlo_audit(mechanism, data, cfg, &indices),
    }
}

fn exact_audit(
    mechanism: &dyn CreditMechanism,
    data: &Dataset,
    cfg: &AuditConfig,
    indices: &[usize],
) -> Result<Vec<IndexAudit>> {
    let full = mechanism.exact_distribution(data)?;
    let mut out = Vec::with_capacity(indices.len());
    for &i in indices {
        let credit = full.mass_where(|k| k.credits(i));
        if credit >= 1.0 - ALWAYS_CREDITED_TOLERANCE {
            out.push(IndexAudit {
                index: i,
                status: AuditStatus::AlwaysCredited,
                credit_probability: credit,
                credit_lower_bound: None,
                conditional_samples: None,
                report: None,
            });
            continue;
        }
        let conditioned = full
            .condition(|k| !k.credits(i))
            .expect("positive mass off the credited event");
        let omitted = mechanism
            .exact_distribution(&data.omit(i)?)?
            .map(|k| k.lift_after_omission(i));
        let report = approx_indistinguishable(&conditioned, &omitted, cfg.privacy)?;
        out.push(IndexAudit {
            index: i,
            status: if report.pass {
                AuditStatus::Pass
            } else {
                AuditStatus::Fail
            },
            credit_probability: credit,
            credit_lower_bound: None,
            conditional_samples: None,
            report: Some(report),
        });
    }
    Ok(out)
}

fn sample_outputs(
    mechanism: &dyn CreditMechanism,
    data: &Dataset,
    trials: u64,
    seed: u64,
    stream: u64,
) -> Result<Vec<OutputKey>> {
    run_trials(trials, |t| {
        let mut rng = trial_rng(seed, stream, t);
        mechanism.run(data, &mut rng).and_then(|o| {
            o.check_positions(data.len())?;
            Ok(o.key())
        })
    })
    .into_iter()
    .collect()
}

fn monte_carlo_audit(
    mechanism: &dyn CreditMechanism,
    data: &Dataset,
    cfg: &AuditConfig,
    indices: &[usize],
) -> Result<Vec<IndexAudit>> {
    if cfg.trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let base = stream_id(&format!("cca_audit/{}", mechanism.name()));
    let full = sample_outputs(mechanism, data, cfg.trials, cfg.seed, base)?;
    let mut out = Vec::with_capacity(indices.len());
    for &i in indices {
        let mut kept: BTreeMap<OutputKey, u64> = BTreeMap::new();
        for k in full.iter().filter(|k| !k.credits(i)) {
            *kept.entry(k.clone()).or_insert(0) += 1;
        }
        let uncredited: u64 = kept.values().sum();
        let credit = 1.0 - uncredited as f64 / cfg.trials as f64;
        let mut row = IndexAudit {
            index: i,
            status: AuditStatus::AlwaysCredited,
            credit_probability: credit,
            credit_lower_bound: None,
            conditional_samples: Some(uncredited),
            report: None,
        };
        if uncredited == 0 {
            row.credit_lower_bound = Some(1.0 - 1.0 / cfg.trials as f64);
        } else if uncredited < MIN_CONDITIONAL_SAMPLES {
            row.status = AuditStatus::InsufficientConditioningMass;
        } else {
            let conditioned = FiniteDistribution::from_counts(kept)?;
            let stream = base ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let omitted = sample_outputs(mechanism, &data.omit(i)?, cfg.trials, cfg.seed, stream)?;
            let omitted = FiniteDistribution::from_samples(
                omitted.into_iter().map(|k| k.lift_after_omission(i)),
            )?;
            let report = approx_indistinguishable(&conditioned, &omitted, cfg.privacy)?;
            row.status = if report.pass {
                AuditStatus::Pass
            } else {
                AuditStatus::Fail
            };
            row.report = Some(report);
        }
        out.push(row);
    }
    Ok(out)
}
