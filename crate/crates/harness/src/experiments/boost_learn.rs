//! Boosting-based compression as a learner: held-out risk and credited-set
//! size as `n` grows.

use cca_core::compression::{for_sample_size, stable_boost_compress, WeakClass};
use cca_core::seeding::{run_trials, stream_id, trial_rng};
use cca_core::{Dataset, Hypothesis, Point};
use rand::Rng;

use crate::config::Config;
use crate::error::{config_err, Result};
use crate::output::{csv_string, Cell, Check, Report};

pub const HEADER: &[&str] = &[
    "n",
    "credited_size",
    "train_risk",
    "heldout_risk",
    "runs",
    "failures",
];

/// `ceil((d ln(d/alpha) + d ln(1/beta)) / alpha)`; at `d = 1, alpha = 0.05,
/// beta = 0.1` this is 106.
pub fn sample_size(d: usize, alpha: f64, beta: f64) -> usize {
    let d = d as f64;
    ((d * (d / alpha).ln() + d * (1.0 / beta).ln()) / alpha).ceil() as usize
}

/// A realizable target on `x_1..x_m` for the weak class.
pub fn target(class: WeakClass, m: usize) -> Hypothesis {
    match class {
        WeakClass::Threshold => Hypothesis::Threshold(3 * m / 10 + 1),
        WeakClass::Interval => Hypothesis::Interval {
            lo: 3 * m / 10 + 1,
            hi: 6 * m / 10,
        },
    }
}

/// Exact risk under the uniform distribution on the grid.
pub fn grid_risk(h: &Hypothesis, target: &Hypothesis, m: usize) -> Result<f64> {
    let mut wrong = 0usize;
    for j in 1..=m {
        let x = Point::Grid(j);
        wrong += (h.predict(&x)? != target.predict(&x)?) as usize;
    }
    Ok(wrong as f64 / m as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub credited: usize,
    pub train_risk: f64,
    pub heldout_risk: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeRow {
    pub n: usize,
    pub runs: u64,
    /// Runs that errored or exceeded `alpha`.
    pub failures: u64,
    pub mean_credited: f64,
    pub mean_train_risk: f64,
    pub mean_heldout_risk: f64,
}

pub struct Setup {
    pub class: WeakClass,
    pub m: usize,
    pub alpha: f64,
    pub xi: f64,
    pub runs: u64,
    pub seed: u64,
}

pub fn run_size(setup: &Setup, n: usize) -> Result<SizeRow> {
    let cfg = for_sample_size(n, setup.class, setup.xi)?;
    let target = target(setup.class, setup.m);
    let stream = stream_id(&format!("boost_learn/{:?}/{n}", setup.class));
    let outcomes = run_trials(setup.runs, |t| -> Result<Option<RunOutcome>> {
        let mut rng = trial_rng(setup.seed, stream, t);
        let mut pairs = Vec::with_capacity(n);
        for _ in 0..n {
            let j = rng.gen_range(1..=setup.m);
            pairs.push((j, target.predict(&Point::Grid(j))?));
        }
        let s = Dataset::grid(setup.m, &pairs)?;
        let run = match stable_boost_compress(&s, setup.class, &cfg, &mut rng) {
            Ok(r) => r,
            Err(cca_core::Error::WeakLearnerFailed { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        Ok(Some(RunOutcome {
            credited: run.distinct_credited(),
            train_risk: cca_core::empirical_risk(&run.output.hypothesis, &s)?,
            heldout_risk: grid_risk(&run.output.hypothesis, &target, setup.m)?,
        }))
    });
    let mut ok = Vec::new();
    let mut failures = 0;
    for o in outcomes {
        match o? {
            Some(r) => {
                if r.heldout_risk > setup.alpha {
                    failures += 1;
                }
                ok.push(r);
            }
            None => failures += 1,
        }
    }
    let mean = |f: &dyn Fn(&RunOutcome) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(f).sum::<f64>() / ok.len() as f64
        }
    };
    Ok(SizeRow {
        n,
        runs: setup.runs,
        failures,
        mean_credited: mean(&|r| r.credited as f64),
        mean_train_risk: mean(&|r| r.train_risk),
        mean_heldout_risk: mean(&|r| r.heldout_risk),
    })
}

/// Least-squares `c` in `size = c ln n` over `rows`.
pub fn log_fit(rows: &[SizeRow]) -> f64 {
    let num: f64 = rows.iter().map(|r| r.mean_credited * (r.n as f64).ln()).sum();
    let den: f64 = rows.iter().map(|r| (r.n as f64).ln().powi(2)).sum();
    num / den
}

pub fn run(cfg: &Config) -> Result<Report> {
    let d = cfg.usize_or("d", 1)?;
    let class = match d {
        1 => WeakClass::Threshold,
        2 => WeakClass::Interval,
        _ => return Err(config_err(format!("d must be 1 (thresholds) or 2 (intervals), got {d}"))),
    };
    let alpha = cfg.f64_or("alpha", 0.05)?;
    let beta = cfg.f64_or("beta", 0.1)?;
    let setup = Setup {
        class,
        m: cfg.usize_or("m", 10_000)?,
        alpha,
        xi: cfg.f64_or("xi", 0.1)?,
        runs: cfg.usize_or("trials", 200)? as u64,
        seed: cfg.seed()?,
    };
    if setup.m < 2 {
        return Err(config_err("m must be >= 2"));
    }
    let ns = cfg.usize_list_or("n", &[100, 400, 1600])?;
    let rows = ns.iter().map(|&n| run_size(&setup, n)).collect::<Result<Vec<_>>>()?;

    let n0 = sample_size(d, alpha, beta);
    let mut checks = Vec::new();
    for r in rows.iter().filter(|r| r.n >= n0) {
        let rate = r.failures as f64 / r.runs as f64;
        checks.push(Check::new(
            format!("risk at n = {}", r.n),
            rate <= 2.0 * beta,
            format!("failure rate {rate:.3} vs 2 beta = {}", 2.0 * beta),
        ));
    }
    if rows.len() >= 3 {
        let (head, last) = rows.split_at(rows.len() - 1);
        let c = log_fit(head);
        let predicted = c * (last[0].n as f64).ln();
        let ratio = last[0].mean_credited / predicted;
        checks.push(Check::new(
            "size fit",
            (1.0 / 1.5..=1.5).contains(&ratio),
            format!("c = {c:.3}, n = {} measured/fit = {ratio:.3}", last[0].n),
        ));
    }
    let body: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                Cell::U(r.n as u64),
                Cell::F(r.mean_credited),
                Cell::F(r.mean_train_risk),
                Cell::F(r.mean_heldout_risk),
                Cell::U(r.runs),
                Cell::U(r.failures),
            ]
        })
        .collect();
    Ok(Report {
        csv: Some(csv_string(HEADER, &body)?),
        json: None,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sample_size() {
        assert_eq!(sample_size(1, 0.05, 0.1), 106);
    }

    #[test]
    fn risk_on_grid() {
        let t = Hypothesis::Threshold(4);
        assert_eq!(grid_risk(&Hypothesis::Threshold(6), &t, 10).unwrap(), 0.2);
        assert_eq!(grid_risk(&t, &t, 10).unwrap(), 0.0);
    }
}
