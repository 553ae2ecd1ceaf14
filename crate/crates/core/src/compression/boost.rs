//! Randomized compression by boosting with sampled weak learners.
//!
//! Each round draws `m0` examples (with replacement) from the current
//! boosting distribution over `S`, fits a weak hypothesis by ERM on the draw
//! and reweights `S` with the fixed step `alpha = ln((1/2 + g)/(1/2 - g)) / 2`.
//! The compression is the concatenation of accepted draws; reconstruction
//! refits each round's weak hypothesis from its `m0` examples and takes the
//! unweighted majority.

use rand::distributions::{Distribution, WeightedIndex};
use serde::Serialize;

use super::{check_threshold_realizable, CompressionScheme};
use crate::data::Dataset;
use crate::distribution::FiniteDistribution;
use crate::error::{invalid, Error, Result};
use crate::hypothesis::Hypothesis;
use crate::mechanism::CreditedOutput;
use crate::seeding::SimRng;

/// Redraws allowed per round before the weak learner is declared failed.
pub const MAX_REDRAWS: usize = 10;

/// Rounds per unit of `ln(n / xi)` used by [`for_sample_size`].
pub const ROUNDS_PER_LOG: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WeakClass {
    Threshold,
    Interval,
}

impl WeakClass {
    pub fn vc_dimension(self) -> usize {
        match self {
            WeakClass::Threshold => 1,
            WeakClass::Interval => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoostConfig {
    pub rounds: usize,
    pub gamma: f64,
    pub weak_sample_size: usize,
    pub xi: f64,
}

impl BoostConfig {
    pub fn new(rounds: usize, gamma: f64, weak_sample_size: usize, xi: f64) -> Result<Self> {
        if rounds == 0 {
            return Err(invalid("rounds must be >= 1"));
        }
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(invalid(format!("gamma must lie in (0, 1/2), got {gamma}")));
        }
        if weak_sample_size == 0 {
            return Err(invalid("weak sample size must be >= 1"));
        }
        if !(xi > 0.0 && xi < 1.0) {
            return Err(invalid(format!("xi must lie in (0, 1), got {xi}")));
        }
        Ok(Self {
            rounds,
            gamma,
            weak_sample_size,
            xi,
        })
    }

    pub fn alpha(&self) -> f64 {
        0.5 * ((0.5 + self.gamma) / (0.5 - self.gamma)).ln()
    }

    pub fn size_bound(&self) -> usize {
        self.rounds * self.weak_sample_size
    }
}

/// Defaults for a nominal sample size `n`: `gamma = 1/8`, `m0 = 8d`,
/// `T = ceil(ROUNDS_PER_LOG * ln(n / xi))`.
///
/// The round count must be fixed before the scheme sees any data; letting it
/// track `|S|` would make `kappa(S')` run a different number of rounds than
/// `kappa(S)`.
pub fn for_sample_size(n: usize, class: WeakClass, xi: f64) -> Result<BoostConfig> {
    if n == 0 {
        return Err(invalid("nominal sample size must be >= 1"));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(invalid(format!("xi must lie in (0, 1), got {xi}")));
    }
    let rounds = (ROUNDS_PER_LOG * (n as f64 / xi).ln()).ceil().max(1.0) as usize;
    BoostConfig::new(rounds, 0.125, 8 * class.vc_dimension(), xi)
}

fn grid_labels(data: &Dataset) -> Result<(usize, Vec<(usize, u8)>)> {
    let m = data
        .domain_size()
        .ok_or_else(|| invalid("boosting needs a finite grid domain"))?;
    let mut out = Vec::with_capacity(data.len());
    for (index, ex) in data.iter().enumerate() {
        let j = ex.grid_index().ok_or_else(|| Error::InvalidExample {
            index,
            reason: "boosting needs grid points".into(),
        })?;
        out.push((j, ex.y));
    }
    Ok((m, out))
}

fn check_interval_realizable(pairs: &[(usize, u8)]) -> Result<()> {
    let ones = pairs.iter().filter(|p| p.1 == 1).map(|p| p.0);
    let (lo, hi) = match (ones.clone().min(), ones.max()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(()),
    };
    if pairs.iter().any(|&(j, y)| y == 0 && lo <= j && j <= hi) {
        return Err(Error::NotRealizable);
    }
    Ok(())
}

/// Per grid value, counts of label 0 and label 1, ascending.
fn tally(pairs: &[(usize, u8)]) -> Vec<(usize, usize, usize)> {
    let mut sorted: Vec<_> = pairs.to_vec();
    sorted.sort_unstable();
    let mut out: Vec<(usize, usize, usize)> = Vec::new();
    for (j, y) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == j => {
                if y == 0 {
                    last.1 += 1
                } else {
                    last.2 += 1
                }
            }
            _ => out.push((j, (y == 0) as usize, (y == 1) as usize)),
        }
    }
    out
}

fn erm_threshold(m: usize, cells: &[(usize, usize, usize)]) -> Hypothesis {
    let total0: usize = cells.iter().map(|c| c.1).sum();
    let Some(&(first, _, _)) = cells.first() else {
        return Hypothesis::Threshold(1.max(m.div_ceil(2)));
    };
    // Cell `j` holds thresholds that put the first `j` distinct values at 0.
    let mut best = (total0, 1, first);
    let (mut ones_left, mut zeros_right) = (0usize, total0);
    for (j, c) in cells.iter().enumerate() {
        ones_left += c.2;
        zeros_right -= c.1;
        let lo = c.0 + 1;
        let hi = cells.get(j + 1).map_or(m, |next| next.0);
        if lo > hi {
            continue;
        }
        let err = ones_left + zeros_right;
        if err < best.0 {
            best = (err, lo, hi);
        }
    }
    Hypothesis::Threshold((best.1 + best.2) / 2)
}

fn erm_interval(m: usize, cells: &[(usize, usize, usize)]) -> Hypothesis {
    let total1: usize = cells.iter().map(|c| c.2).sum();
    let mut best: (usize, Option<(usize, usize)>) = (total1, None);
    for a in 0..cells.len() {
        let (mut zeros_in, mut ones_in) = (0usize, 0usize);
        for b in a..cells.len() {
            zeros_in += cells[b].1;
            ones_in += cells[b].2;
            let err = zeros_in + (total1 - ones_in);
            if err < best.0 {
                best = (err, Some((a, b)));
            }
        }
    }
    match best.1 {
        None => Hypothesis::Constant(0),
        Some((a, b)) => {
            let prev = if a == 0 { 0 } else { cells[a - 1].0 };
            let next = cells.get(b + 1).map_or(m + 1, |c| c.0);
            let lo = (prev + 1 + cells[a].0) / 2;
            let hi = (cells[b].0 + next - 1).div_ceil(2);
            Hypothesis::Interval { lo, hi }
        }
    }
}

/// ERM over the class on a multiset of grid examples. Among minimizers the
/// leftmost cell is chosen and the hypothesis sits at the cell midpoint.
pub fn weak_fit(sample: &Dataset, class: WeakClass) -> Result<Hypothesis> {
    let (m, pairs) = grid_labels(sample)?;
    let cells = tally(&pairs);
    Ok(match class {
        WeakClass::Threshold => erm_threshold(m, &cells),
        WeakClass::Interval => erm_interval(m, &cells),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoostRun {
    pub output: CreditedOutput,
    /// Accepted draws, round by round (`rounds * m0` positions).
    pub draws: Vec<usize>,
    pub redraws: usize,
    /// Whether the majority vote labels every example of `S` correctly.
    pub consistent: bool,
}

impl BoostRun {
    pub fn distinct_credited(&self) -> usize {
        self.output.credited.len()
    }
}

fn softmax(log_w: &[f64]) -> Vec<f64> {
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

pub fn stable_boost_compress(
    data: &Dataset,
    class: WeakClass,
    cfg: &BoostConfig,
    rng: &mut SimRng,
) -> Result<BoostRun> {
    check_boost_input(data, class)?;
    let n = data.len();
    let alpha = cfg.alpha();
    let mut log_w = vec![0.0; n];
    let mut draws = Vec::with_capacity(cfg.size_bound());
    let mut voters = Vec::with_capacity(cfg.rounds);
    let mut redraws = 0;
    for round in 0..cfg.rounds {
        let probs = softmax(&log_w);
        let sampler = WeightedIndex::new(&probs).map_err(|e| invalid(e.to_string()))?;
        let mut attempts = 0;
        let (h, picked, wrong) = loop {
            let picked: Vec<usize> = (0..cfg.weak_sample_size)
                .map(|_| sampler.sample(rng))
                .collect();
            let h = weak_fit(&data.select(&picked)?, class)?;
            let mut wrong = Vec::with_capacity(n);
            for ex in data {
                wrong.push(h.errs_on(ex)?);
            }
            let err: f64 = probs.iter().zip(&wrong).filter(|(_, w)| **w).map(|(p, _)| p).sum();
            if err <= 0.5 - cfg.gamma + 1e-12 {
                break (h, picked, wrong);
            }
            attempts += 1;
            if attempts > MAX_REDRAWS {
                return Err(Error::WeakLearnerFailed {
                    round: round + 1,
                    attempts,
                });
            }
        };
        redraws += attempts;
        for (l, w) in log_w.iter_mut().zip(&wrong) {
            *l += if *w { alpha } else { -alpha };
        }
        voters.push(h);
        draws.extend(picked);
    }
    let hypothesis = Hypothesis::majority(voters)?;
    let mut consistent = true;
    for ex in data {
        consistent &= !hypothesis.errs_on(ex)?;
    }
    Ok(BoostRun {
        output: CreditedOutput::new(hypothesis, draws.iter().copied()),
        draws,
        redraws,
        consistent,
    })
}

/// Largest number of draw sequences [`exact_draw_distribution`] enumerates.
pub const EXACT_PATH_LIMIT: usize = 2_000_000;

fn check_boost_input(data: &Dataset, class: WeakClass) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (_, pairs) = grid_labels(data)?;
    match class {
        WeakClass::Threshold => check_threshold_realizable(data),
        WeakClass::Interval => check_interval_realizable(&pairs),
    }
}

/// Exact law of the accepted draw sequence of [`stable_boost_compress`],
/// obtained by enumerating every draw tuple in every round. `None` is the
/// weak-learner failure outcome.
pub fn exact_draw_distribution(
    data: &Dataset,
    class: WeakClass,
    cfg: &BoostConfig,
) -> Result<FiniteDistribution<Option<Vec<usize>>>> {
    check_boost_input(data, class)?;
    let n = data.len();
    let draws_total = cfg.size_bound() as u32;
    let paths = (n as f64).powi(draws_total as i32);
    if paths > EXACT_PATH_LIMIT as f64 {
        return Err(Error::TooLargeForExact {
            n,
            limit: EXACT_PATH_LIMIT,
        });
    }
    let mut out: Vec<(Option<Vec<usize>>, f64)> = Vec::new();
    let mut prefix = Vec::with_capacity(draws_total as usize);
    exact_rounds(data, class, cfg, &vec![0.0; n], 1.0, &mut prefix, &mut out)?;
    FiniteDistribution::exact(out)
}

fn exact_rounds(
    data: &Dataset,
    class: WeakClass,
    cfg: &BoostConfig,
    log_w: &[f64],
    mass: f64,
    prefix: &mut Vec<usize>,
    out: &mut Vec<(Option<Vec<usize>>, f64)>,
) -> Result<()> {
    if prefix.len() == cfg.size_bound() {
        out.push((Some(prefix.clone()), mass));
        return Ok(());
    }
    let n = data.len();
    let m0 = cfg.weak_sample_size;
    let probs = softmax(log_w);
    let mut accepted: Vec<(Vec<usize>, f64, Vec<bool>)> = Vec::new();
    let mut tuple = vec![0usize; m0];
    loop {
        let p: f64 = tuple.iter().map(|&i| probs[i]).product();
        if p > 0.0 {
            let h = weak_fit(&data.select(&tuple)?, class)?;
            let mut wrong = Vec::with_capacity(n);
            for ex in data {
                wrong.push(h.errs_on(ex)?);
            }
            let err: f64 = probs.iter().zip(&wrong).filter(|(_, w)| **w).map(|(p, _)| p).sum();
            if err <= 0.5 - cfg.gamma + 1e-12 {
                accepted.push((tuple.clone(), p, wrong));
            }
        }
        // Odometer over [n]^m0.
        let mut k = 0;
        while k < m0 {
            tuple[k] += 1;
            if tuple[k] < n {
                break;
            }
            tuple[k] = 0;
            k += 1;
        }
        if k == m0 {
            break;
        }
    }
    let reject: f64 = 1.0 - accepted.iter().map(|a| a.1).sum::<f64>();
    let reject = reject.max(0.0);
    let tries: f64 = (0..=MAX_REDRAWS as i32).map(|r| reject.powi(r)).sum();
    let fail = reject.powi(MAX_REDRAWS as i32 + 1);
    if fail > 0.0 {
        out.push((None, mass * fail));
    }
    let alpha = cfg.alpha();
    for (tuple, p, wrong) in accepted {
        let next: Vec<f64> = log_w
            .iter()
            .zip(&wrong)
            .map(|(l, w)| if *w { l + alpha } else { l - alpha })
            .collect();
        prefix.extend_from_slice(&tuple);
        exact_rounds(data, class, cfg, &next, mass * p * tries, prefix, out)?;
        prefix.truncate(prefix.len() - m0);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct BoostScheme {
    pub class: WeakClass,
    pub cfg: BoostConfig,
}

impl CompressionScheme for BoostScheme {
    fn name(&self) -> String {
        format!("boost[{:?}, T={}, m0={}]", self.class, self.cfg.rounds, self.cfg.weak_sample_size)
    }

    fn compress(&self, data: &Dataset, rng: &mut SimRng) -> Result<Vec<usize>> {
        Ok(stable_boost_compress(data, self.class, &self.cfg, rng)?.draws)
    }

    fn reconstruct(&self, selected: &Dataset) -> Result<Hypothesis> {
        let m0 = self.cfg.weak_sample_size;
        if selected.is_empty() || !selected.len().is_multiple_of(m0) {
            return Err(invalid(format!(
                "selected sequence of length {} is not a whole number of rounds",
                selected.len()
            )));
        }
        let mut voters = Vec::with_capacity(selected.len() / m0);
        for start in (0..selected.len()).step_by(m0) {
            let chunk: Vec<usize> = (start..start + m0).collect();
            voters.push(weak_fit(&selected.select(&chunk)?, self.class)?);
        }
        Hypothesis::majority(voters)
    }

    fn size_bound(&self, n: usize) -> usize {
        n.min(self.cfg.size_bound())
    }

    fn is_deterministic(&self) -> bool {
        false
    }
}
