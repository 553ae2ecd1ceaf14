use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::distribution::{FiniteDistribution, PrivacyParams};
use crate::error::{invalid, Error, Result};
use crate::seeding::SimRng;

/// Largest `n` for which exact selector distributions are enumerated.
pub const EXACT_SELECTION_LIMIT: usize = 16;

/// An ordered tuple of `k` selected positions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SelectionResult {
    pub indices: Vec<usize>,
}

impl SelectionResult {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Fraction of selected positions whose bit is set.
    pub fn useful_fraction(&self, bits: &[bool]) -> f64 {
        if self.indices.is_empty() {
            return 0.0;
        }
        let hits = self.indices.iter().filter(|&&i| bits[i]).count();
        hits as f64 / self.indices.len() as f64
    }
}

/// A (randomized) map from bit strings to `k`-tuples of positions.
pub trait Selector: Sync {
    fn name(&self) -> String;

    fn select(&self, bits: &[bool], k: usize, rng: &mut SimRng) -> Result<SelectionResult>;

    fn exact_distribution(&self, bits: &[bool], k: usize)
        -> Result<FiniteDistribution<Vec<usize>>>;

    /// The privacy guarantee the selector claims.
    fn declared_privacy(&self) -> PrivacyParams;
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k > n {
        return Err(Error::SelectionTooLarge { k, n });
    }
    Ok(())
}

fn check_exact(n: usize) -> Result<()> {
    if n > EXACT_SELECTION_LIMIT {
        return Err(Error::TooLargeForExact {
            n,
            limit: EXACT_SELECTION_LIMIT,
        });
    }
    Ok(())
}

/// `1 / (1 + e^eps)`; zero when `eps` is infinite.
pub fn flip_probability(eps: f64) -> f64 {
    if eps.is_infinite() {
        0.0
    } else {
        1.0 / (1.0 + eps.exp())
    }
}

/// Always the first `k` positions.
#[derive(Clone, Copy, Debug, Default)]
pub struct ObliviousSelector;

impl Selector for ObliviousSelector {
    fn name(&self) -> String {
        "oblivious".into()
    }

    fn select(&self, bits: &[bool], k: usize, _rng: &mut SimRng) -> Result<SelectionResult> {
        check_k(k, bits.len())?;
        Ok(SelectionResult {
            indices: (0..k).collect(),
        })
    }

    fn exact_distribution(
        &self,
        bits: &[bool],
        k: usize,
    ) -> Result<FiniteDistribution<Vec<usize>>> {
        check_k(k, bits.len())?;
        Ok(FiniteDistribution::point_mass((0..k).collect()))
    }

    fn declared_privacy(&self) -> PrivacyParams {
        PrivacyParams { eps: 0.0, delta: 0.0 }
    }
}

/// A uniformly random `k`-subset in ascending order, ignoring the bits.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformSelector;

impl Selector for UniformSelector {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn select(&self, bits: &[bool], k: usize, rng: &mut SimRng) -> Result<SelectionResult> {
        check_k(k, bits.len())?;
        let mut indices = index::sample(rng, bits.len(), k).into_vec();
        indices.sort_unstable();
        Ok(SelectionResult { indices })
    }

    fn exact_distribution(
        &self,
        bits: &[bool],
        k: usize,
    ) -> Result<FiniteDistribution<Vec<usize>>> {
        check_k(k, bits.len())?;
        check_exact(bits.len())?;
        let pool: Vec<usize> = (0..bits.len()).collect();
        let subsets = k_subsets(&pool, k);
        let w = 1.0 / subsets.len() as f64;
        FiniteDistribution::exact(subsets.into_iter().map(|s| (s, w)))
    }

    fn declared_privacy(&self) -> PrivacyParams {
        PrivacyParams { eps: 0.0, delta: 0.0 }
    }
}

/// Randomized response: flip each bit with probability `1/(1 + e^eps)`, then
/// pick `k` of the positions whose noisy bit is 1, padding with uniformly
/// chosen other positions if there are fewer than `k`.
#[derive(Clone, Copy, Debug)]
pub struct RandomizedResponse {
    eps: f64,
}

impl RandomizedResponse {
    /// `eps` may be `f64::INFINITY` (no flips).
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(invalid(format!("eps must be >= 0, got {eps}")));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

fn select_from_noisy(noisy: &[bool], k: usize, rng: &mut SimRng) -> Vec<usize> {
    let ones: Vec<usize> = (0..noisy.len()).filter(|&i| noisy[i]).collect();
    if ones.len() >= k {
        let mut picked: Vec<usize> = index::sample(rng, ones.len(), k)
            .into_iter()
            .map(|j| ones[j])
            .collect();
        picked.sort_unstable();
        picked
    } else {
        let rest: Vec<usize> = (0..noisy.len()).filter(|&i| !noisy[i]).collect();
        let mut extra: Vec<usize> = index::sample(rng, rest.len(), k - ones.len())
            .into_iter()
            .map(|j| rest[j])
            .collect();
        extra.sort_unstable();
        let mut out = ones;
        out.extend(extra);
        out
    }
}

pub fn randomized_response_select(
    bits: &[bool],
    k: usize,
    eps: f64,
    rng: &mut SimRng,
) -> Result<SelectionResult> {
    RandomizedResponse::new(eps)?.select(bits, k, rng)
}

impl Selector for RandomizedResponse {
    fn name(&self) -> String {
        format!("rr[eps={}]", self.eps)
    }

    fn select(&self, bits: &[bool], k: usize, rng: &mut SimRng) -> Result<SelectionResult> {
        check_k(k, bits.len())?;
        let q = flip_probability(self.eps);
        let noisy: Vec<bool> = bits.iter().map(|&b| b ^ (rng.gen::<f64>() < q)).collect();
        Ok(SelectionResult {
            indices: select_from_noisy(&noisy, k, rng),
        })
    }

    fn exact_distribution(
        &self,
        bits: &[bool],
        k: usize,
    ) -> Result<FiniteDistribution<Vec<usize>>> {
        let n = bits.len();
        check_k(k, n)?;
        check_exact(n)?;
        let q = flip_probability(self.eps);
        let mut out = Vec::new();
        for flips in 0..1u32 << n {
            let mut p = 1.0;
            let mut noisy = Vec::with_capacity(n);
            for (i, &b) in bits.iter().enumerate() {
                let f = flips >> i & 1 == 1;
                p *= if f { q } else { 1.0 - q };
                noisy.push(b ^ f);
            }
            if p == 0.0 {
                continue;
            }
            let ones: Vec<usize> = (0..n).filter(|&i| noisy[i]).collect();
            let rest: Vec<usize> = (0..n).filter(|&i| !noisy[i]).collect();
            let options: Vec<Vec<usize>> = if ones.len() >= k {
                k_subsets(&ones, k)
            } else {
                k_subsets(&rest, k - ones.len())
                    .into_iter()
                    .map(|t| ones.iter().copied().chain(t).collect())
                    .collect()
            };
            let w = p / options.len() as f64;
            out.extend(options.into_iter().map(|o| (o, w)));
        }
        FiniteDistribution::exact(out)
    }

    fn declared_privacy(&self) -> PrivacyParams {
        PrivacyParams {
            eps: self.eps,
            delta: 0.0,
        }
    }
}

/// All `k`-subsets of `pool`, each in the order of `pool`.
pub(crate) fn k_subsets(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(pool: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for i in start..=pool.len() - need {
            cur.push(pool[i]);
            rec(pool, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= pool.len() {
        rec(pool, k, 0, &mut Vec::with_capacity(k), &mut out);
    }
    out
}
