use serde::Serialize;

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundForm {
    Tight,
    Loose,
}

fn check(p: f64, eps: f64, delta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0, 1], got {p}")));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(invalid(format!("eps must be finite and >= 0, got {eps}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(invalid(format!("delta must lie in [0, 1), got {delta}")));
    }
    Ok(())
}

/// Range of `E[Z]` attainable by an `(eps, delta)`-DP selector when the bits
/// are i.i.d. Bernoulli(`p`), where `Z` is the fraction of selected 1-bits.
///
/// Tight: `(p - n p (1-p) delta) / (p + (1-p) e^eps)` to
/// `(p e^eps + n p (1-p) delta) / (1 - p + p e^eps)`.
/// Loose: `p e^-eps - delta n` to `p e^eps + delta n`.
///
/// The values are returned as the formulas give them, without clipping to
/// `[0, 1]`.
pub fn expected_fraction_bounds(
    p: f64,
    eps: f64,
    delta: f64,
    n: usize,
    form: BoundForm,
) -> Result<(f64, f64)> {
    check(p, eps, delta)?;
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let e = eps.exp();
    let n = n as f64;
    Ok(match form {
        BoundForm::Tight => {
            let spread = n * p * (1.0 - p) * delta;
            (
                (p - spread) / (p + (1.0 - p) * e),
                (p * e + spread) / (1.0 - p + p * e),
            )
        }
        BoundForm::Loose => (p / e - delta * n, p * e + delta * n),
    })
}

/// Guaranteed `E[Z]` of randomized response at `delta = 0`:
/// `(1 - k n^k exp((k - n)(1 - p + p e^eps)/(1 + e^eps))) * p e^eps / (1 - p + p e^eps)`,
/// with a negative prefactor clamped to 0.
pub fn rr_lower_bound(p: f64, eps: f64, k: usize, n: usize) -> Result<f64> {
    check(p, eps, 0.0)?;
    if k == 0 || k > n {
        return Err(if k > n {
            Error::SelectionTooLarge { k, n }
        } else {
            invalid("k must be >= 1")
        });
    }
    let e = eps.exp();
    let (kf, nf) = (k as f64, n as f64);
    let mass = 1.0 - p + p * e;
    let log_tail = kf.ln() + kf * nf.ln() + (kf - nf) * mass / (1.0 + e);
    let prefactor = (1.0 - log_tail.exp()).max(0.0);
    Ok(prefactor * p * e / mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_two_upper() {
        let (_, hi) = expected_fraction_bounds(0.1, 9f64.ln(), 0.0, 10, BoundForm::Tight).unwrap();
        assert!((hi - 0.5).abs() < 1e-12);
        // Same number through 1 / (9/p - 8) with p = 0.9.
        assert!((hi - 1.0 / (9.0 / 0.9 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_privacy_loss_pins_p() {
        for form in [BoundForm::Tight, BoundForm::Loose] {
            let (lo, hi) = expected_fraction_bounds(0.3, 0.0, 0.0, 50, form).unwrap();
            assert!((lo - 0.3).abs() < 1e-15 && (hi - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn loose_example() {
        let (lo, hi) = expected_fraction_bounds(0.1, 1.0, 1e-6, 1000, BoundForm::Loose).unwrap();
        assert!((lo - (0.1 / 1f64.exp() - 1e-3)).abs() < 1e-15);
        assert!((hi - (0.1 * 1f64.exp() + 1e-3)).abs() < 1e-15);
    }

    #[test]
    fn rr_bound_values() {
        let v = rr_lower_bound(0.1, 9f64.ln(), 10, 2000).unwrap();
        assert!((v - 0.5).abs() < 1e-3);
        assert_eq!(rr_lower_bound(0.1, 1.0, 5, 5).unwrap(), 0.0);
        let at_zero = rr_lower_bound(0.2, 0.0, 2, 400).unwrap();
        let prefactor = 1.0 - 2.0 * 400f64.powi(2) * (-398.0f64 / 2.0).exp();
        assert!((at_zero - 0.2 * prefactor).abs() < 1e-15);
        assert!(rr_lower_bound(0.1, 1.0, 6, 5).is_err());
    }

    #[test]
    fn validation() {
        assert!(expected_fraction_bounds(1.5, 1.0, 0.0, 3, BoundForm::Tight).is_err());
        assert!(expected_fraction_bounds(0.5, -1.0, 0.0, 3, BoundForm::Tight).is_err());
        assert!(expected_fraction_bounds(0.5, 1.0, 1.0, 3, BoundForm::Tight).is_err());
    }
}
