//! Semi-private threshold learning, sample DP-compression, and the
//! dummy-injection reduction from DP-compression to private learning.
//!
//! The class is `H_m = {h_1, .., h_m}` over the grid `x_1 < .. < x_m` with
//! `h_i(x_j) = 1[i <= j]`. The point `x_m` carries the dummy example
//! `(x_m, 1)`, which every hypothesis in `H_m` labels correctly.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::Serialize;

use crate::data::{Dataset, LabeledExample};
use crate::distribution::{FiniteDistribution, PrivacyParams};
use crate::error::{invalid, Error, Result};
use crate::hypothesis::{Hypothesis, HypothesisKey};
use crate::mechanism::{CreditMechanism, CreditedOutput, OutputKey};
use crate::seeding::SimRng;
use crate::selection::Selector;

/// Largest sample size for which [`ReductionLearner::exact_distribution`]
/// enumerates the `2^n` coin patterns.
pub const EXACT_REDUCTION_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdClassSpec {
    m: usize,
}

impl ThresholdClassSpec {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(invalid(format!("domain size must be >= 2, got {m}")));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dummy(&self) -> LabeledExample {
        LabeledExample::grid(self.m, 1)
    }

    /// Number of examples in `data` misclassified by `h_i`.
    fn errors(&self, i: usize, data: &Dataset) -> usize {
        data.iter()
            .filter(|ex| ex.grid_index().is_some_and(|j| ((i <= j) as u8) != ex.y))
            .count()
    }

    fn check_data(&self, data: &Dataset) -> Result<()> {
        for (index, ex) in data.iter().enumerate() {
            match ex.grid_index() {
                Some(j) if j >= 1 && j <= self.m => {}
                _ => {
                    return Err(Error::InvalidExample {
                        index,
                        reason: format!("expected a grid point in 1..={}", self.m),
                    })
                }
            }
        }
        Ok(())
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0) {
        return Err(invalid(format!("eps must be >= 0, got {eps}")));
    }
    Ok(())
}

/// Exponential-mechanism weights over `candidates`: `exp(-eps * err_i / 2)`,
/// normalized. Infinite `eps` is uniform over the error minimizers.
fn exp_mech_probs(
    spec: &ThresholdClassSpec,
    candidates: &[usize],
    data: &Dataset,
    eps: f64,
) -> Vec<f64> {
    let errs: Vec<usize> = candidates.iter().map(|&i| spec.errors(i, data)).collect();
    let best = errs.iter().copied().min().unwrap_or(0);
    let w: Vec<f64> = errs
        .iter()
        .map(|&e| {
            if eps.is_infinite() {
                (e == best) as u8 as f64
            } else {
                (-eps * (e - best) as f64 / 2.0).exp()
            }
        })
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// Thresholds in `H_m` that label every public example correctly.
fn consistent_thresholds(spec: &ThresholdClassSpec, public: &Dataset) -> Result<Vec<usize>> {
    let c: Vec<usize> = (1..=spec.m)
        .filter(|&i| spec.errors(i, public) == 0)
        .collect();
    if c.is_empty() {
        return Err(Error::PublicDataInconsistent);
    }
    Ok(c)
}

/// Samples `h_i` with probability proportional to `exp(-eps * n * R_S(h_i) / 2)`.
pub fn exp_mech_learn_thresholds(
    data: &Dataset,
    spec: &ThresholdClassSpec,
    eps: f64,
    rng: &mut SimRng,
) -> Result<Hypothesis> {
    semidp_learn(&Dataset::empty(Some(spec.m)), data, spec, eps, rng)
}

pub fn exp_mech_distribution(
    data: &Dataset,
    spec: &ThresholdClassSpec,
    eps: f64,
) -> Result<FiniteDistribution<HypothesisKey>> {
    semidp_distribution(&Dataset::empty(Some(spec.m)), data, spec, eps)
}

/// Restrict `H_m` to the thresholds consistent with `public`, then run the
/// exponential mechanism on `private`.
pub fn semidp_learn(
    public: &Dataset,
    private: &Dataset,
    spec: &ThresholdClassSpec,
    eps: f64,
    rng: &mut SimRng,
) -> Result<Hypothesis> {
    check_eps(eps)?;
    spec.check_data(public)?;
    spec.check_data(private)?;
    let candidates = consistent_thresholds(spec, public)?;
    let probs = exp_mech_probs(spec, &candidates, private, eps);
    let pick = WeightedIndex::new(&probs).map_err(|e| invalid(e.to_string()))?;
    Ok(Hypothesis::Threshold(candidates[pick.sample(rng)]))
}

pub fn semidp_distribution(
    public: &Dataset,
    private: &Dataset,
    spec: &ThresholdClassSpec,
    eps: f64,
) -> Result<FiniteDistribution<HypothesisKey>> {
    check_eps(eps)?;
    spec.check_data(public)?;
    spec.check_data(private)?;
    let candidates = consistent_thresholds(spec, public)?;
    let probs = exp_mech_probs(spec, &candidates, private, eps);
    FiniteDistribution::exact(
        candidates
            .into_iter()
            .zip(probs)
            .map(|(i, p)| (HypothesisKey::Threshold(i), p)),
    )
}

/// A learner with a public and a private input part.
pub trait SemiDpMechanism: Sync {
    fn name(&self) -> String;

    fn run(&self, public: &Dataset, private: &Dataset, rng: &mut SimRng) -> Result<Hypothesis>;

    fn exact_distribution(
        &self,
        public: &Dataset,
        private: &Dataset,
    ) -> Result<FiniteDistribution<HypothesisKey>>;

    fn privacy(&self) -> PrivacyParams;
}

/// [`semidp_learn`] at a fixed `eps`.
#[derive(Clone, Copy, Debug)]
pub struct SemiDpThresholds {
    pub spec: ThresholdClassSpec,
    pub eps: f64,
}

impl SemiDpMechanism for SemiDpThresholds {
    fn name(&self) -> String {
        format!("semidp-thresholds[m={}, eps={}]", self.spec.m, self.eps)
    }

    fn run(&self, public: &Dataset, private: &Dataset, rng: &mut SimRng) -> Result<Hypothesis> {
        semidp_learn(public, private, &self.spec, self.eps, rng)
    }

    fn exact_distribution(
        &self,
        public: &Dataset,
        private: &Dataset,
    ) -> Result<FiniteDistribution<HypothesisKey>> {
        semidp_distribution(public, private, &self.spec, self.eps)
    }

    fn privacy(&self) -> PrivacyParams {
        PrivacyParams {
            eps: self.eps,
            delta: 0.0,
        }
    }
}

/// Treats the first `k` examples as public and credits them.
#[derive(Clone, Copy, Debug)]
pub struct PublicPrefix<M> {
    pub mechanism: M,
    pub k: usize,
}

pub fn make_cca_from_semidp<M: SemiDpMechanism>(mechanism: M, k: usize) -> PublicPrefix<M> {
    PublicPrefix { mechanism, k }
}

impl<M: SemiDpMechanism> PublicPrefix<M> {
    fn split(&self, data: &Dataset) -> Result<(Dataset, Dataset)> {
        if self.k > data.len() {
            return Err(Error::SelectionTooLarge {
                k: self.k,
                n: data.len(),
            });
        }
        let head: Vec<usize> = (0..self.k).collect();
        Ok((data.select(&head)?, data.omit_many(&head)?))
    }
}

impl<M: SemiDpMechanism> CreditMechanism for PublicPrefix<M> {
    fn name(&self) -> String {
        format!("public-prefix[k={}]({})", self.k, self.mechanism.name())
    }

    fn run(&self, data: &Dataset, rng: &mut SimRng) -> Result<CreditedOutput> {
        let (public, private) = self.split(data)?;
        let h = self.mechanism.run(&public, &private, rng)?;
        Ok(CreditedOutput::new(h, 0..self.k))
    }

    fn exact_distribution(&self, data: &Dataset) -> Result<FiniteDistribution<OutputKey>> {
        let (public, private) = self.split(data)?;
        let credited: Vec<usize> = (0..self.k).collect();
        Ok(self
            .mechanism
            .exact_distribution(&public, &private)?
            .map(|h| OutputKey {
                hypothesis: h.clone(),
                credited: credited.clone(),
            }))
    }
}

/// Which bit of each example the compression function selects on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BitRule {
    LabelIsOne,
    LabelIsZero,
    /// 1 unless the example sits on the given grid point.
    AwayFrom(usize),
}

impl BitRule {
    pub fn bits(&self, data: &Dataset) -> Vec<bool> {
        data.iter()
            .map(|ex| match self {
                BitRule::LabelIsOne => ex.y == 1,
                BitRule::LabelIsZero => ex.y == 0,
                BitRule::AwayFrom(j) => ex.grid_index() != Some(*j),
            })
            .collect()
    }
}

/// `M(S) = rho(S|kappa(S), S|not kappa(S))` with `kappa` a private selector
/// on per-example bits and `rho` a semi-private learner.
#[derive(Clone, Copy, Debug)]
pub struct DpCompressionScheme<S, R> {
    pub selector: S,
    pub bits: BitRule,
    pub learner: R,
    pub k: usize,
}

impl<S: Selector, R: SemiDpMechanism> DpCompressionScheme<S, R> {
    /// The weaker of the two components' guarantees.
    pub fn privacy(&self) -> PrivacyParams {
        let a = self.selector.declared_privacy();
        let b = self.learner.privacy();
        PrivacyParams {
            eps: a.eps.max(b.eps),
            delta: a.delta.max(b.delta),
        }
    }

    fn parts(&self, data: &Dataset, selected: &[usize]) -> Result<(Dataset, Dataset)> {
        Ok((data.select(selected)?, data.omit_many(selected)?))
    }
}

pub fn dp_compress_learn<S: Selector, R: SemiDpMechanism>(
    data: &Dataset,
    scheme: &DpCompressionScheme<S, R>,
    rng: &mut SimRng,
) -> Result<CreditedOutput> {
    let bits = scheme.bits.bits(data);
    let selected = scheme.selector.select(&bits, scheme.k, rng)?.indices;
    let (public, private) = scheme.parts(data, &selected)?;
    let h = scheme.learner.run(&public, &private, rng)?;
    Ok(CreditedOutput::new(h, selected))
}

impl<S: Selector, R: SemiDpMechanism> CreditMechanism for DpCompressionScheme<S, R> {
    fn name(&self) -> String {
        format!(
            "dp-compression[k={}]({}, {})",
            self.k,
            self.selector.name(),
            self.learner.name()
        )
    }

    fn run(&self, data: &Dataset, rng: &mut SimRng) -> Result<CreditedOutput> {
        dp_compress_learn(data, self, rng)
    }

    fn exact_distribution(&self, data: &Dataset) -> Result<FiniteDistribution<OutputKey>> {
        let bits = self.bits.bits(data);
        let mut parts = Vec::new();
        for (selected, w) in self.selector.exact_distribution(&bits, self.k)?.iter() {
            let (public, private) = self.parts(data, selected)?;
            let mut credited = selected.clone();
            credited.sort_unstable();
            let inner = self
                .learner
                .exact_distribution(&public, &private)?
                .map(|h| OutputKey {
                    hypothesis: h.clone(),
                    credited: credited.clone(),
                });
            parts.push((w, inner));
        }
        FiniteDistribution::mixture(parts)
    }
}

/// `1 / (64 k e^eps)`: makes `k p e^eps <= 1/64`.
pub fn reduction_p(k: usize, eps: f64) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be >= 1"));
    }
    check_eps(eps)?;
    Ok(1.0 / (64.0 * k as f64 * eps.exp()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionRun {
    pub hypothesis: Hypothesis,
    /// Credited positions of the constructed sample holding real examples.
    pub non_dummy_credited: usize,
    pub fallback: bool,
    /// Heads came up after the real examples ran out.
    pub padded: bool,
    pub constructed: Dataset,
}

/// Private learner for thresholds over `x_1 .. x_{m-1}` built from a
/// DP-compression scheme for `H_m`.
#[derive(Clone, Copy, Debug)]
pub struct ReductionLearner<S, R> {
    pub scheme: DpCompressionScheme<S, R>,
    pub spec: ThresholdClassSpec,
    pub p: f64,
    /// Outcome of the last [`ReductionLearner::check_delta_regime`].
    delta_regime_ok: bool,
}

/// Restriction of `h in H_m` to `x_1 .. x_{m-1}`.
fn restrict(h: &Hypothesis, m: usize) -> Hypothesis {
    match h {
        Hypothesis::Threshold(i) if *i >= m => Hypothesis::Constant(0),
        other => other.clone(),
    }
}

impl<S: Selector, R: SemiDpMechanism> ReductionLearner<S, R> {
    pub fn new(scheme: DpCompressionScheme<S, R>, spec: ThresholdClassSpec, p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(invalid(format!("p must lie in (0, 1], got {p}")));
        }
        Ok(Self {
            scheme,
            spec,
            p,
            delta_regime_ok: true,
        })
    }

    /// Whether `delta <= 1/(64 n^2)` for the scheme at sample size `n`;
    /// logs a warning otherwise.
    pub fn check_delta_regime(&mut self, n: usize) -> bool {
        let delta = self.scheme.privacy().delta;
        let limit = 1.0 / (64.0 * (n as f64).powi(2));
        self.delta_regime_ok = delta <= limit;
        if !self.delta_regime_ok {
            log::warn!("scheme delta {delta} exceeds 1/(64 n^2) = {limit} at n = {n}");
        }
        self.delta_regime_ok
    }

    pub fn delta_regime_ok(&self) -> bool {
        self.delta_regime_ok
    }

    fn check_input(&self, data: &Dataset) -> Result<()> {
        for (index, ex) in data.iter().enumerate() {
            match ex.grid_index() {
                Some(j) if j >= 1 && j < self.spec.m => {}
                _ => {
                    return Err(Error::InvalidExample {
                        index,
                        reason: format!("expected a grid point in 1..={}", self.spec.m - 1),
                    })
                }
            }
        }
        Ok(())
    }

    /// Fill `n` slots: heads takes the next real example, tails the dummy.
    fn construct(&self, data: &Dataset, heads: impl Iterator<Item = bool>) -> Result<(Dataset, bool)> {
        let mut real = data.iter();
        let mut padded = false;
        let mut slots = Vec::with_capacity(data.len());
        for h in heads.take(data.len()) {
            let ex = if h {
                match real.next() {
                    Some(ex) => *ex,
                    None => {
                        padded = true;
                        self.spec.dummy()
                    }
                }
            } else {
                self.spec.dummy()
            };
            slots.push(ex);
        }
        Ok((Dataset::new(slots, Some(self.spec.m))?, padded))
    }

    fn non_dummy(&self, selected: &[usize], constructed: &Dataset) -> usize {
        let dummy = self.spec.dummy();
        let mut distinct = selected.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        distinct
            .into_iter()
            .filter(|&j| constructed.get(j) != Some(&dummy))
            .count()
    }

    /// Runs the scheme on the constructed sample. When a real example is
    /// credited the reconstruction is skipped: the output is `Constant(1)`
    /// whatever it would have returned.
    pub fn run_detailed(&self, data: &Dataset, rng: &mut SimRng) -> Result<ReductionRun> {
        self.check_input(data)?;
        let coins: Vec<bool> = (0..data.len()).map(|_| rng.gen::<f64>() < self.p).collect();
        let (constructed, padded) = self.construct(data, coins.into_iter())?;
        let bits = self.scheme.bits.bits(&constructed);
        let selected = self.scheme.selector.select(&bits, self.scheme.k, rng)?.indices;
        let non_dummy = self.non_dummy(&selected, &constructed);
        let hypothesis = if non_dummy > 0 {
            Hypothesis::Constant(1)
        } else {
            let (public, private) = self.scheme.parts(&constructed, &selected)?;
            restrict(&self.scheme.learner.run(&public, &private, rng)?, self.spec.m)
        };
        Ok(ReductionRun {
            fallback: non_dummy > 0,
            hypothesis,
            non_dummy_credited: non_dummy,
            padded,
            constructed,
        })
    }

    pub fn run(&self, data: &Dataset, rng: &mut SimRng) -> Result<Hypothesis> {
        Ok(self.run_detailed(data, rng)?.hypothesis)
    }

    /// Exact output law over the `2^n` coin patterns and the exact laws of
    /// the selector and the learner.
    pub fn exact_distribution(&self, data: &Dataset) -> Result<FiniteDistribution<HypothesisKey>> {
        self.check_input(data)?;
        let n = data.len();
        if n > EXACT_REDUCTION_LIMIT {
            return Err(Error::TooLargeForExact {
                n,
                limit: EXACT_REDUCTION_LIMIT,
            });
        }
        let mut parts = Vec::new();
        for pattern in 0..1u32 << n {
            let heads = (0..n).map(|i| pattern >> i & 1 == 1);
            let ones = pattern.count_ones() as i32;
            let w = self.p.powi(ones) * (1.0 - self.p).powi(n as i32 - ones);
            if w == 0.0 {
                continue;
            }
            let (constructed, _) = self.construct(data, heads)?;
            let bits = self.scheme.bits.bits(&constructed);
            for (selected, ws) in self.scheme.selector.exact_distribution(&bits, self.scheme.k)?.iter() {
                let inner = if self.non_dummy(selected, &constructed) > 0 {
                    FiniteDistribution::point_mass(HypothesisKey::Constant(1))
                } else {
                    let (public, private) = self.scheme.parts(&constructed, selected)?;
                    let m = self.spec.m;
                    self.scheme
                        .learner
                        .exact_distribution(&public, &private)?
                        .map(|k| match k {
                            HypothesisKey::Threshold(i) if *i >= m => HypothesisKey::Constant(0),
                            other => other.clone(),
                        })
                };
                parts.push((w * ws, inner));
            }
        }
        FiniteDistribution::mixture(parts)
    }
}

/// The dummy mixture `p D + (1 - p) delta_{(x_m, 1)}` of a finite `D`.
pub fn dummy_mixture(
    dist: &[(LabeledExample, f64)],
    spec: &ThresholdClassSpec,
    p: f64,
) -> Result<Vec<(LabeledExample, f64)>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0, 1], got {p}")));
    }
    let mut out: Vec<_> = dist.iter().map(|&(ex, w)| (ex, p * w)).collect();
    out.push((spec.dummy(), 1.0 - p));
    Ok(out)
}
