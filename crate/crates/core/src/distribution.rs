//! Finite output distributions and the `(eps, delta)`-closeness calculus.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Tolerance on the total mass of an exact distribution.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Round-off allowance added to the budget when both arms are exact.
pub const EXACT_ROUNDOFF: f64 = 1e-12;

/// Failure probability behind the empirical slack.
pub const SLACK_CONFIDENCE: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DistributionKind {
    Exact,
    Empirical { samples: u64 },
}

/// A probability distribution over finitely many canonicalized outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution<K: Ord> {
    mass: BTreeMap<K, f64>,
    kind: DistributionKind,
}

impl<K: Ord + Clone> FiniteDistribution<K> {
    /// Exact distribution; repeated outcomes are merged, zero weights dropped.
    pub fn exact<I: IntoIterator<Item = (K, f64)>>(weights: I) -> Result<Self> {
        let mut mass = BTreeMap::new();
        let mut total = 0.0;
        for (k, w) in weights {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidDistribution(format!("weight {w} is not a probability")));
            }
            total += w;
            if w > 0.0 {
                *mass.entry(k).or_insert(0.0) += w;
            }
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self {
            mass,
            kind: DistributionKind::Exact,
        })
    }

    pub fn point_mass(outcome: K) -> Self {
        Self {
            mass: BTreeMap::from([(outcome, 1.0)]),
            kind: DistributionKind::Exact,
        }
    }

    /// Empirical distribution; each weight is exactly `count / total`.
    pub fn from_samples<I: IntoIterator<Item = K>>(samples: I) -> Result<Self> {
        let mut counts: BTreeMap<K, u64> = BTreeMap::new();
        for s in samples {
            *counts.entry(s).or_insert(0) += 1;
        }
        Self::from_counts(counts)
    }

    pub fn from_counts(counts: BTreeMap<K, u64>) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("no samples".into()));
        }
        let mass = counts
            .into_iter()
            .filter(|(_, c)| *c > 0)
            .map(|(k, c)| (k, c as f64 / total as f64))
            .collect();
        Ok(Self {
            mass,
            kind: DistributionKind::Empirical { samples: total },
        })
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn samples(&self) -> Option<u64> {
        match self.kind {
            DistributionKind::Exact => None,
            DistributionKind::Empirical { samples } => Some(samples),
        }
    }

    pub fn prob(&self, outcome: &K) -> f64 {
        self.mass.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.mass.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.mass.iter().map(|(k, &p)| (k, p))
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass_where(&self, pred: impl Fn(&K) -> bool) -> f64 {
        self.mass.iter().filter(|(k, _)| pred(k)).map(|(_, p)| p).sum()
    }

    /// Conditional distribution on `pred`, or `None` if the event has no mass.
    pub fn condition(&self, pred: impl Fn(&K) -> bool) -> Option<Self> {
        let z = self.mass_where(&pred);
        if z <= 0.0 {
            return None;
        }
        let mass = self
            .mass
            .iter()
            .filter(|(k, _)| pred(k))
            .map(|(k, p)| (k.clone(), p / z))
            .collect();
        let kind = match self.kind {
            DistributionKind::Exact => DistributionKind::Exact,
            DistributionKind::Empirical { samples } => DistributionKind::Empirical {
                samples: (z * samples as f64).round() as u64,
            },
        };
        Some(Self { mass, kind })
    }

    /// Push the distribution through `f`, merging colliding outcomes.
    pub fn map<J: Ord + Clone>(&self, f: impl Fn(&K) -> J) -> FiniteDistribution<J> {
        let mut mass = BTreeMap::new();
        for (k, p) in &self.mass {
            *mass.entry(f(k)).or_insert(0.0) += p;
        }
        FiniteDistribution {
            mass,
            kind: self.kind,
        }
    }

    /// Mixture `sum_j w_j * D_j` of exact distributions.
    pub fn mixture(parts: Vec<(f64, FiniteDistribution<K>)>) -> Result<Self> {
        let weights = parts
            .into_iter()
            .flat_map(|(w, d)| d.mass.into_iter().map(move |(k, p)| (k, w * p)));
        Self::exact(weights)
    }
}

/// Privacy parameters `(eps, delta)` with `eps >= 0` and `0 <= delta < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrivacyParams {
    pub eps: f64,
    pub delta: f64,
}

impl PrivacyParams {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(invalid(format!("eps must be >= 0, got {eps}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(invalid(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(Self { eps, delta })
    }

    pub fn pure(eps: f64) -> Result<Self> {
        Self::new(eps, 0.0)
    }
}

/// Outcome of an `(eps, delta)`-closeness check between two distributions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosenessReport {
    /// Least delta with `p(E) <= e^eps q(E) + delta` for all events.
    pub delta_pq: f64,
    /// Least delta with `q(E) <= e^eps p(E) + delta` for all events.
    pub delta_qp: f64,
    pub eps_used: f64,
    pub delta_budget: f64,
    /// Allowance added to `delta_budget` (sampling error or round-off).
    pub slack: f64,
    pub pass: bool,
    pub samples_p: Option<u64>,
    pub samples_q: Option<u64>,
}

impl ClosenessReport {
    pub fn divergence(&self) -> f64 {
        self.delta_pq.max(self.delta_qp)
    }

    /// Same comparison with the roles of `p` and `q` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            delta_pq: self.delta_qp,
            delta_qp: self.delta_pq,
            samples_p: self.samples_q,
            samples_q: self.samples_p,
            ..self.clone()
        }
    }
}

/// `sum_x max(0, p(x) - e^eps q(x))`, the largest `p(E) - e^eps q(E)` over
/// all events `E`.
pub fn hockey_stick_divergence<K: Ord + Clone>(
    p: &FiniteDistribution<K>,
    q: &FiniteDistribution<K>,
    eps: f64,
) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(invalid(format!("eps must be >= 0, got {eps}")));
    }
    let scale = eps.exp();
    let mut total = 0.0;
    for (x, px) in p.iter() {
        let qx = q.prob(x);
        let excess = if qx == 0.0 {
            px
        } else if scale.is_infinite() {
            0.0
        } else {
            px - scale * qx
        };
        if excess > 0.0 {
            total += excess;
        }
    }
    Ok(total)
}

/// Two-sided DKW-style allowance `3 sqrt(ln(2 / 0.01) / (2N))` for `N`
/// samples per arm.
pub fn statistical_slack(samples: u64) -> f64 {
    if samples == 0 {
        return f64::INFINITY;
    }
    3.0 * ((2.0 / SLACK_CONFIDENCE).ln() / (2.0 * samples as f64)).sqrt()
}

/// Check `p ≈_{eps, delta} q` in both directions.
///
/// If either side is empirical, the budget gains [`statistical_slack`] for
/// the smaller sample count; otherwise only [`EXACT_ROUNDOFF`].
pub fn approx_indistinguishable<K: Ord + Clone>(
    p: &FiniteDistribution<K>,
    q: &FiniteDistribution<K>,
    params: PrivacyParams,
) -> Result<ClosenessReport> {
    let delta_pq = hockey_stick_divergence(p, q, params.eps)?;
    let delta_qp = hockey_stick_divergence(q, p, params.eps)?;
    let samples_p = p.samples();
    let samples_q = q.samples();
    let slack = match (samples_p, samples_q) {
        (None, None) => EXACT_ROUNDOFF,
        (a, b) => statistical_slack(a.into_iter().chain(b).min().unwrap_or(0)),
    };
    let pass = delta_pq.max(delta_qp) <= params.delta + slack;
    Ok(ClosenessReport {
        delta_pq,
        delta_qp,
        eps_used: params.eps,
        delta_budget: params.delta,
        slack,
        pass,
        samples_p,
        samples_q,
    })
}
