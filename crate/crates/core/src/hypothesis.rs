//! Binary classifiers over grid and planar domains.

use std::fmt;

use serde::Serialize;

use crate::data::{Dataset, LabeledExample, Point};
use crate::error::{invalid, Error, Result};

/// Quantum used when comparing halfplane coefficients.
pub const HALFPLANE_RESOLUTION: f64 = 1e-9;

/// A line `w . x + b = 0` in canonical form: `|w| = 1` and the first
/// nonzero coordinate of `w` positive. `positive_label` is the label given
/// to points with `w . x + b >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Halfplane {
    w: [f64; 2],
    b: f64,
    positive_label: u8,
}

impl Halfplane {
    pub fn new(w: [f64; 2], b: f64, positive_label: u8) -> Result<Self> {
        let norm = w[0].hypot(w[1]);
        if !(norm > 0.0) || !norm.is_finite() || !b.is_finite() {
            return Err(invalid("halfplane normal must be finite and nonzero"));
        }
        if positive_label > 1 {
            return Err(invalid("halfplane label must be 0 or 1"));
        }
        let (mut w, mut b) = ([w[0] / norm, w[1] / norm], b / norm);
        let mut positive_label = positive_label;
        let leading = if w[0] != 0.0 { w[0] } else { w[1] };
        if leading < 0.0 {
            w = [-w[0], -w[1]];
            b = -b;
            positive_label = 1 - positive_label;
        }
        // Avoid -0.0 so equal lines compare bit-for-bit.
        let clean = |v: f64| if v == 0.0 { 0.0 } else { v };
        Ok(Self {
            w: [clean(w[0]), clean(w[1])],
            b: clean(b),
            positive_label,
        })
    }

    pub fn w(&self) -> [f64; 2] {
        self.w
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn positive_label(&self) -> u8 {
        self.positive_label
    }

    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        self.w[0] * p[0] + self.w[1] * p[1] + self.b
    }

    pub fn predict(&self, p: [f64; 2]) -> u8 {
        if self.signed_distance(p) >= 0.0 {
            self.positive_label
        } else {
            1 - self.positive_label
        }
    }

    fn quantized(&self) -> ([i64; 2], i64) {
        let q = |v: f64| (v / HALFPLANE_RESOLUTION).round() as i64;
        ([q(self.w[0]), q(self.w[1])], q(self.b))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Hypothesis {
    /// `h_i(x_j) = 1[i <= j]` over the grid.
    Threshold(usize),
    /// Labels grid points in `lo..=hi` as 1.
    Interval { lo: usize, hi: usize },
    Halfplane(Halfplane),
    /// Unweighted vote; ties go to label 1.
    MajorityVote(Vec<Hypothesis>),
    Constant(u8),
}

impl Hypothesis {
    pub fn threshold(i: usize) -> Result<Self> {
        if i == 0 {
            return Err(invalid("threshold index must be >= 1"));
        }
        Ok(Self::Threshold(i))
    }

    pub fn interval(lo: usize, hi: usize) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(invalid(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self::Interval { lo, hi })
    }

    pub fn majority(votes: Vec<Hypothesis>) -> Result<Self> {
        if votes.is_empty() {
            return Err(invalid("majority vote needs at least one voter"));
        }
        Ok(Self::MajorityVote(votes))
    }

    pub fn predict(&self, x: &Point) -> Result<u8> {
        match (self, x) {
            (Hypothesis::Constant(c), _) => Ok(*c),
            (Hypothesis::Threshold(i), Point::Grid(j)) => Ok((*i <= *j) as u8),
            (Hypothesis::Interval { lo, hi }, Point::Grid(j)) => Ok((lo <= j && j <= hi) as u8),
            (Hypothesis::Halfplane(h), Point::Plane(p)) => Ok(h.predict(*p)),
            (Hypothesis::MajorityVote(votes), _) => {
                let mut ones = 0usize;
                for v in votes {
                    ones += v.predict(x)? as usize;
                }
                Ok((2 * ones >= votes.len()) as u8)
            }
            (h, p) => Err(Error::DomainMismatch {
                hypothesis: h.to_string(),
                point: p.to_string(),
            }),
        }
    }

    pub fn errs_on(&self, ex: &LabeledExample) -> Result<bool> {
        Ok(self.predict(&ex.x)? != ex.y)
    }

    /// Canonical key used as a distribution outcome.
    pub fn key(&self) -> HypothesisKey {
        match self {
            Hypothesis::Threshold(i) => HypothesisKey::Threshold(*i),
            Hypothesis::Interval { lo, hi } => HypothesisKey::Interval(*lo, *hi),
            Hypothesis::Halfplane(h) => {
                let (w, b) = h.quantized();
                HypothesisKey::Halfplane {
                    w,
                    b,
                    positive_label: h.positive_label,
                }
            }
            Hypothesis::MajorityVote(votes) => {
                let mut keys: Vec<_> = votes.iter().map(Hypothesis::key).collect();
                keys.sort();
                HypothesisKey::MajorityVote(keys)
            }
            Hypothesis::Constant(c) => HypothesisKey::Constant(*c),
        }
    }

    pub fn semantically_eq(&self, other: &Hypothesis) -> bool {
        self.key() == other.key()
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::Threshold(i) => write!(f, "threshold({i})"),
            Hypothesis::Interval { lo, hi } => write!(f, "interval({lo}..={hi})"),
            Hypothesis::Halfplane(h) => write!(
                f,
                "halfplane(w=({:.6}, {:.6}), b={:.6}, +={})",
                h.w[0], h.w[1], h.b, h.positive_label
            ),
            Hypothesis::MajorityVote(v) => write!(f, "majority({} voters)", v.len()),
            Hypothesis::Constant(c) => write!(f, "constant({c})"),
        }
    }
}

/// Hashable, totally ordered stand-in for a [`Hypothesis`].
///
/// Thresholds and intervals compare by index; halfplanes by canonical
/// coefficients quantized to [`HALFPLANE_RESOLUTION`]; majority votes by
/// the sorted multiset of their voters.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum HypothesisKey {
    Threshold(usize),
    Interval(usize, usize),
    Halfplane {
        w: [i64; 2],
        b: i64,
        positive_label: u8,
    },
    MajorityVote(Vec<HypothesisKey>),
    Constant(u8),
}

/// Fraction of examples in `data` misclassified by `h`.
pub fn empirical_risk(h: &Hypothesis, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut errors = 0usize;
    for ex in data {
        errors += h.errs_on(ex)? as usize;
    }
    Ok(errors as f64 / data.len() as f64)
}

/// Risk of `h` under a finite distribution over labeled examples.
pub fn population_risk(h: &Hypothesis, dist: &[(LabeledExample, f64)]) -> Result<f64> {
    let mut risk = 0.0;
    for (ex, w) in dist {
        if h.errs_on(ex)? {
            risk += w;
        }
    }
    Ok(risk)
}
