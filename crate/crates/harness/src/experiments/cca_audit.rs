//! Credit-attribution audits of the reference mechanisms.

use cca_core::audit::{cca_audit, AuditConfig, AuditStatus, IndexAudit};
use cca_core::compression::{as_cca_mechanism, SvmScheme, ThresholdScheme};
use cca_core::mechanism::{ConstantMechanism, FirstLabelMechanism};
use cca_core::semidp::{make_cca_from_semidp, SemiDpThresholds, ThresholdClassSpec};
use cca_core::{Dataset, Hypothesis, PrivacyParams};
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::error::Result;
use crate::output::{Check, Report};

/// The eight-point two-class example; support vectors are positions 1, 2, 5.
pub fn svm_example() -> Dataset {
    Dataset::plane(&[
        ([2.0, 1.0], 0),
        ([2.0, 2.2], 0),
        ([3.0, 1.5], 0),
        ([2.5, 1.0], 0),
        ([3.0, 3.5], 1),
        ([3.0, 2.5], 1),
        ([4.5, 2.7], 1),
        ([4.0, 3.7], 1),
    ])
    .expect("valid points")
}

/// Calls `f` on every ordered sample of length `n` over `x_1..x_m` that some
/// `h_i`, `1 <= i <= m`, labels correctly.
pub fn for_each_realizable(n: usize, m: usize, mut f: impl FnMut(&Dataset) -> Result<()>) -> Result<()> {
    let mut xs = vec![1usize; n];
    loop {
        let mut distinct = xs.clone();
        distinct.sort_unstable();
        distinct.dedup();
        // Cut c labels the c smallest distinct values 0; a 0 on x_m is
        // not realizable.
        let cuts = if distinct.last() == Some(&m) {
            distinct.len()
        } else {
            distinct.len() + 1
        };
        for c in 0..cuts {
            let boundary = distinct.get(c).copied().unwrap_or(m + 1);
            let pairs: Vec<(usize, u8)> = xs.iter().map(|&j| (j, (j >= boundary) as u8)).collect();
            f(&Dataset::grid(m, &pairs)?)?;
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(());
            }
            if xs[pos] < m {
                xs[pos] += 1;
                break;
            }
            xs[pos] = 1;
            pos += 1;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepSummary {
    pub datasets: u64,
    pub audited_indices: u64,
    pub always_credited: u64,
    pub max_divergence: f64,
    pub nonconforming: u64,
}

impl SweepSummary {
    pub fn absorb(&mut self, rows: &[IndexAudit]) {
        self.datasets += 1;
        for r in rows {
            self.audited_indices += 1;
            if r.status == AuditStatus::AlwaysCredited {
                self.always_credited += 1;
            }
            if !r.conforms() {
                self.nonconforming += 1;
            }
            if let Some(d) = r.divergence() {
                self.max_divergence = self.max_divergence.max(d);
            }
        }
    }

    pub fn exact_zero(&self) -> bool {
        self.nonconforming == 0 && self.max_divergence == 0.0
    }
}

pub fn threshold_sweep(max_n: usize, m: usize) -> Result<SweepSummary> {
    let cfg = AuditConfig::exact(PrivacyParams { eps: 0.0, delta: 0.0 });
    let mech = as_cca_mechanism(ThresholdScheme);
    let mut summary = SweepSummary::default();
    for n in 1..=max_n {
        for_each_realizable(n, m, |s| {
            summary.absorb(&cca_audit(&mech, s, &cfg)?);
            Ok(())
        })?;
    }
    Ok(summary)
}

fn rows_json(rows: &[IndexAudit]) -> serde_json::Value {
    serde_json::to_value(rows).expect("audit rows serialize")
}

pub fn run(cfg: &Config) -> Result<Report> {
    let seed = cfg.seed()?;
    let eps = cfg.f64_or("eps", 1.0)?;
    let delta = cfg.f64_or("delta", 0.0)?;
    let k = cfg.usize_or("k", 2)?;
    let trials = cfg.usize_or("trials", 100_000)? as u64;
    let max_n = cfg.usize_or("n", 5)?;
    let m = cfg.usize_or("m", 4)?;
    let zero = PrivacyParams::new(0.0, 0.0)?;
    let mut checks = Vec::new();

    let svm = cca_audit(&as_cca_mechanism(SvmScheme), &svm_example(), &AuditConfig::exact(zero))?;
    let svm_ok = svm.iter().all(|r| r.conforms() && r.divergence().is_none_or(|d| d == 0.0));
    checks.push(Check::new("svm exact", svm_ok, "eps = delta = 0, divergence 0"));

    let grid = Dataset::grid(4, &[(1, 0), (3, 1), (2, 0), (4, 1), (3, 1)])?;
    let constant = cca_audit(&ConstantMechanism(Hypothesis::Constant(1)), &grid, &AuditConfig::exact(zero))?;
    checks.push(Check::new(
        "constant output",
        constant.iter().all(|r| r.status == AuditStatus::Pass),
        "input-independent output passes at eps = delta = 0",
    ));

    let leaky = Dataset::grid(4, &[(3, 1), (1, 0), (2, 1)])?;
    let first = cca_audit(
        &FirstLabelMechanism,
        &leaky,
        &AuditConfig::exact(PrivacyParams::new(0.0, 0.5)?).with_indices(vec![0]),
    )?;
    checks.push(Check::new(
        "first-label leak",
        first[0].status == AuditStatus::Fail && first[0].divergence() == Some(1.0),
        "fails at index 0 with divergence 1",
    ));

    let learner = SemiDpThresholds {
        spec: ThresholdClassSpec::new(4)?,
        eps,
    };
    let prefix = cca_audit(
        &make_cca_from_semidp(learner, k),
        &grid,
        &AuditConfig::monte_carlo(PrivacyParams::new(eps, delta)?, trials, seed),
    )?;
    checks.push(Check::new(
        "semi-private prefix",
        prefix.iter().all(IndexAudit::conforms),
        format!("k = {k}, Monte Carlo at ({eps}, {delta}) with {trials} runs per arm"),
    ));

    let sweep = threshold_sweep(max_n, m)?;
    checks.push(Check::new(
        "threshold sweep",
        sweep.exact_zero(),
        format!("{} realizable samples with n <= {max_n}, m = {m}", sweep.datasets),
    ));

    Ok(Report {
        csv: None,
        json: Some(json!({
            "svm_example": rows_json(&svm),
            "constant": rows_json(&constant),
            "first_label": rows_json(&first),
            "semidp_prefix": { "k": k, "eps": eps, "delta": delta, "trials": trials, "rows": rows_json(&prefix) },
            "threshold_sweep": { "max_n": max_n, "m": m, "summary": sweep },
        })),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realizable_counts() {
        // n = 1, m = 3: x_1 and x_2 take either label, x_3 only 1.
        let mut count = 0;
        for_each_realizable(1, 3, |_| {
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 5);
        // n = 2, m = 2: (1,1),(2,2) two labelings each; (1,2),(2,1) two each.
        let mut seen = Vec::new();
        for_each_realizable(2, 2, |s| {
            seen.push(s.clone());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 7);
    }
}
