//! Size-2 stable compression for thresholds `h_i(x_j) = 1[i <= j]`.

use super::CompressionScheme;
use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::hypothesis::Hypothesis;
use crate::mechanism::CreditedOutput;
use crate::seeding::SimRng;

fn grid_pairs(data: &Dataset) -> Result<(usize, Vec<(usize, u8)>)> {
    let m = data
        .domain_size()
        .ok_or_else(|| invalid("threshold class needs a finite grid domain"))?;
    let mut pairs = Vec::with_capacity(data.len());
    for (index, ex) in data.iter().enumerate() {
        let j = ex.grid_index().ok_or_else(|| Error::InvalidExample {
            index,
            reason: "threshold class needs grid points".into(),
        })?;
        pairs.push((j, ex.y));
    }
    Ok((m, pairs))
}

/// Ok iff some `h_i` with `1 <= i <= m` labels every example correctly.
pub fn check_threshold_realizable(data: &Dataset) -> Result<()> {
    let (m, pairs) = grid_pairs(data)?;
    let max0 = pairs.iter().filter(|p| p.1 == 0).map(|p| p.0).max();
    let min1 = pairs.iter().filter(|p| p.1 == 1).map(|p| p.0).min();
    match (max0, min1) {
        (Some(a), Some(b)) if a >= b => Err(Error::NotRealizable),
        // Every threshold labels x_m as 1.
        (Some(a), _) if a >= m => Err(Error::NotRealizable),
        _ => Ok(()),
    }
}

/// Positions of the rightmost 0-labeled and leftmost 1-labeled examples;
/// among equal grid points the earliest position wins.
fn boundary(pairs: &[(usize, u8)]) -> (Option<usize>, Option<usize>) {
    let mut last0: Option<usize> = None;
    let mut first1: Option<usize> = None;
    for (pos, &(j, y)) in pairs.iter().enumerate() {
        if y == 0 && last0.is_none_or(|q| j > pairs[q].0) {
            last0 = Some(pos);
        }
        if y == 1 && first1.is_none_or(|q| j < pairs[q].0) {
            first1 = Some(pos);
        }
    }
    (last0, first1)
}

fn reconstruct_threshold(data: &Dataset) -> Result<Hypothesis> {
    let (m, pairs) = grid_pairs(data)?;
    let (last0, first1) = boundary(&pairs);
    let i = match (last0, first1) {
        (_, Some(q)) => pairs[q].0,
        (Some(q), None) => pairs[q].0 + 1,
        (None, None) => 1,
    };
    if i > m {
        return Err(Error::NotRealizable);
    }
    Hypothesis::threshold(i)
}

pub fn threshold_compress(data: &Dataset) -> Result<CreditedOutput> {
    check_threshold_realizable(data)?;
    let (_, pairs) = grid_pairs(data)?;
    let (last0, first1) = boundary(&pairs);
    let credited: Vec<usize> = last0.into_iter().chain(first1).collect();
    let hypothesis = reconstruct_threshold(&data.select(&credited)?)?;
    Ok(CreditedOutput::new(hypothesis, credited))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ThresholdScheme;

impl CompressionScheme for ThresholdScheme {
    fn name(&self) -> String {
        "threshold".into()
    }

    fn compress(&self, data: &Dataset, _rng: &mut SimRng) -> Result<Vec<usize>> {
        Ok(threshold_compress(data)?.credited.into_iter().collect())
    }

    fn reconstruct(&self, selected: &Dataset) -> Result<Hypothesis> {
        reconstruct_threshold(selected)
    }

    fn size_bound(&self, n: usize) -> usize {
        n.min(2)
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn staircase() {
        let s = Dataset::grid(4, &[(1, 0), (2, 0), (3, 1), (4, 1)]).unwrap();
        let out = threshold_compress(&s).unwrap();
        assert_eq!(out.credited, BTreeSet::from([1, 2]));
        assert_eq!(out.hypothesis, Hypothesis::Threshold(3));
        let t = threshold_compress(&s.omit(0).unwrap()).unwrap();
        assert_eq!(t.hypothesis, Hypothesis::Threshold(3));
        assert_eq!(t.lift_after_omission(0), out);
    }

    #[test]
    fn one_sided() {
        let ones = Dataset::grid(6, &[(4, 1), (2, 1), (5, 1)]).unwrap();
        let out = threshold_compress(&ones).unwrap();
        assert_eq!(out.credited, BTreeSet::from([1]));
        assert_eq!(out.hypothesis, Hypothesis::Threshold(2));
        let zeros = Dataset::grid(6, &[(4, 0), (2, 0)]).unwrap();
        assert_eq!(
            threshold_compress(&zeros).unwrap().hypothesis,
            Hypothesis::Threshold(5)
        );
        let empty = Dataset::empty(Some(3));
        assert_eq!(
            threshold_compress(&empty).unwrap().hypothesis,
            Hypothesis::Threshold(1)
        );
    }

    #[test]
    fn not_realizable() {
        let s = Dataset::grid(4, &[(1, 1), (2, 0)]).unwrap();
        assert_eq!(threshold_compress(&s).unwrap_err().to_string(), "not realizable");
        let last_zero = Dataset::grid(4, &[(4, 0)]).unwrap();
        assert_eq!(threshold_compress(&last_zero).unwrap_err(), Error::NotRealizable);
    }

    #[test]
    fn duplicates_credit_earliest() {
        let s = Dataset::grid(5, &[(2, 0), (2, 0), (4, 1), (4, 1)]).unwrap();
        let out = threshold_compress(&s).unwrap();
        assert_eq!(out.credited, BTreeSet::from([0, 2]));
    }
}
