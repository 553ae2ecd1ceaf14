//! `E[Z]` sweeps for private selectors against the attainable range.

use cca_core::selection::{
    estimate_z, rr_lower_bound, BitExperiment, EstimateReport, ObliviousSelector, RandomizedResponse, Selector,
    UniformSelector,
};
use cca_core::PrivacyParams;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::Config;
use crate::error::Result;
use crate::output::{csv_string, Cell, Check, Report};

pub const HEADER: &[&str] = &[
    "p",
    "eps",
    "delta",
    "n",
    "k",
    "mean_Z",
    "ci",
    "tight_lower",
    "tight_upper",
    "loose_lower",
    "loose_upper",
    "rr_claim_bound",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectorKind {
    RandomizedResponse,
    Oblivious,
    Uniform,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 3] = [
        SelectorKind::RandomizedResponse,
        SelectorKind::Oblivious,
        SelectorKind::Uniform,
    ];

    /// The selector at privacy level `eps`. The data-independent ones are
    /// `(eps, 0)`-DP for every `eps`.
    pub fn build(self, eps: f64) -> Result<Box<dyn Selector>> {
        Ok(match self {
            SelectorKind::RandomizedResponse => Box::new(RandomizedResponse::new(eps)?),
            SelectorKind::Oblivious => Box::new(ObliviousSelector),
            SelectorKind::Uniform => Box::new(UniformSelector),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub p: f64,
    pub privacy: PrivacyParams,
    pub estimate: EstimateReport,
    /// Only for randomized response at `delta = 0`.
    pub rr_claim_bound: Option<f64>,
}

impl SweepPoint {
    pub fn standard_error(&self) -> f64 {
        self.estimate.ci_halfwidth / 1.96
    }

    /// Whether the mean lies in the tight range widened by `z` standard
    /// errors on each side.
    pub fn inside_tight(&self, z: f64) -> bool {
        let w = z * self.standard_error();
        let (lo, hi) = self.estimate.tight;
        self.estimate.mean_z >= lo - w && self.estimate.mean_z <= hi + w
    }
}

pub struct Grid {
    pub p: Vec<f64>,
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    pub seed: u64,
}

impl Grid {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        Ok(Self {
            p: cfg.list_or("p", &[0.1])?,
            eps: cfg.list_or("eps", &[9f64.ln()])?,
            delta: cfg.list_or("delta", &[0.0])?,
            n: cfg.usize_or("n", 2000)?,
            k: cfg.usize_or("k", 10)?,
            trials: cfg.usize_or("trials", 100_000)? as u64,
            seed: cfg.seed()?,
        })
    }

    pub fn len(&self) -> usize {
        self.p.len() * self.eps.len() * self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn sweep(kind: SelectorKind, grid: &Grid) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(grid.len());
    for &p in &grid.p {
        for &eps in &grid.eps {
            let selector = kind.build(eps)?;
            for &delta in &grid.delta {
                let privacy = PrivacyParams::new(eps, delta)?;
                let estimate = estimate_z(
                    selector.as_ref(),
                    &BitExperiment {
                        n: grid.n,
                        k: grid.k,
                        p,
                        privacy,
                        trials: grid.trials,
                        master_seed: grid.seed,
                    },
                )?;
                let rr_claim_bound = (kind == SelectorKind::RandomizedResponse && delta == 0.0)
                    .then(|| rr_lower_bound(p, eps, grid.k, grid.n))
                    .transpose()?;
                out.push(SweepPoint {
                    p,
                    privacy,
                    estimate,
                    rr_claim_bound,
                });
            }
        }
    }
    Ok(out)
}

/// Two-sided normal quantile for a family-wise level `level` over `points`
/// simultaneous comparisons (Bonferroni).
pub fn simultaneous_z(level: f64, points: usize) -> f64 {
    let tail = (1.0 - level) / (2.0 * points.max(1) as f64);
    Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(1.0 - tail)
}

pub fn rows(points: &[SweepPoint], n: usize, k: usize) -> Vec<Vec<Cell>> {
    points
        .iter()
        .map(|s| {
            vec![
                Cell::F(s.p),
                Cell::F(s.privacy.eps),
                Cell::F(s.privacy.delta),
                Cell::U(n as u64),
                Cell::U(k as u64),
                Cell::F(s.estimate.mean_z),
                Cell::F(s.estimate.ci_halfwidth),
                Cell::F(s.estimate.tight.0),
                Cell::F(s.estimate.tight.1),
                Cell::F(s.estimate.loose.0),
                Cell::F(s.estimate.loose.1),
                s.rr_claim_bound.map_or(Cell::S(String::new()), Cell::F),
            ]
        })
        .collect()
}

/// Randomized response over the configured grid.
pub fn run(cfg: &Config) -> Result<Report> {
    let grid = Grid::from_config(cfg)?;
    let points = sweep(SelectorKind::RandomizedResponse, &grid)?;
    let z = simultaneous_z(0.95, points.len());
    let outside: Vec<String> = points
        .iter()
        .filter(|s| !s.inside_tight(z))
        .map(|s| format!("p={} eps={} delta={}", s.p, s.privacy.eps, s.privacy.delta))
        .collect();
    let checks = vec![Check::new(
        "tight envelope",
        outside.is_empty(),
        if outside.is_empty() {
            format!("{} points inside, simultaneous z = {z:.3}", points.len())
        } else {
            format!("outside: {}", outside.join("; "))
        },
    )];
    Ok(Report {
        csv: Some(csv_string(HEADER, &rows(&points, grid.n, grid.k))?),
        json: None,
        checks,
    })
}
