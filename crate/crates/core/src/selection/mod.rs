//! Private selection of `k` indices from a bit string, the bounds on how far
//! such a selector can boost the fraction of 1-bits, and audits.
//!
//! Indices are 0-based positions into the bit string.

mod bounds;
mod estimate;
mod mechanisms;

pub use bounds::{expected_fraction_bounds, rr_lower_bound, BoundForm};
pub use estimate::{estimate_z, BitExperiment, EstimateReport};
pub use mechanisms::{
    flip_probability, randomized_response_select, ObliviousSelector, RandomizedResponse,
    SelectionResult, Selector, UniformSelector,
};

use serde::Serialize;

use crate::distribution::{approx_indistinguishable, ClosenessReport, PrivacyParams};
use crate::error::{Error, Result};

/// Largest `n` for which [`verify_selector_dp`] enumerates all inputs.
pub const EXACT_DP_LIMIT: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DpAuditReport {
    /// Report for the neighboring pair with the largest divergence.
    pub worst: ClosenessReport,
    pub worst_pair: (Vec<bool>, Vec<bool>),
    pub pairs_checked: usize,
    pub pass: bool,
}

fn bits_of(code: u32, n: usize) -> Vec<bool> {
    (0..n).map(|i| code >> i & 1 == 1).collect()
}

/// Exact `(eps, delta)`-DP check of a selector over every pair of bit strings
/// of length `n` that differ in one position.
pub fn verify_selector_dp(
    selector: &dyn Selector,
    n: usize,
    k: usize,
    params: PrivacyParams,
) -> Result<DpAuditReport> {
    if n > EXACT_DP_LIMIT {
        return Err(Error::TooLargeForExact {
            n,
            limit: EXACT_DP_LIMIT,
        });
    }
    if k > n {
        return Err(Error::SelectionTooLarge { k, n });
    }
    let dists = (0..1u32 << n)
        .map(|c| selector.exact_distribution(&bits_of(c, n), k))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: Option<(ClosenessReport, u32, u32)> = None;
    let mut pairs = 0;
    for a in 0..1u32 << n {
        for j in 0..n {
            let b = a ^ (1 << j);
            if b < a {
                continue;
            }
            pairs += 1;
            let r = approx_indistinguishable(&dists[a as usize], &dists[b as usize], params)?;
            if worst.as_ref().is_none_or(|w| r.divergence() > w.0.divergence()) {
                worst = Some((r, a, b));
            }
        }
    }
    let (worst, a, b) = match worst {
        Some(w) => w,
        None => {
            // n = 0: a single input, nothing to compare.
            let d = selector.exact_distribution(&[], k)?;
            (approx_indistinguishable(&d, &d, params)?, 0, 0)
        }
    };
    Ok(DpAuditReport {
        pass: worst.pass,
        worst,
        worst_pair: (bits_of(a, n), bits_of(b, n)),
        pairs_checked: pairs,
    })
}
