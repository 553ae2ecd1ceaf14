//! Exact hard-margin SVM in the plane.
//!
//! The optimal separator in two dimensions is pinned either by one point of
//! each class (normal along their difference) or by two points of one class
//! and one of the other (normal perpendicular to the same-class pair). We
//! enumerate every such candidate, keep the feasible ones and take the
//! largest margin.

use serde::Serialize;

use super::CompressionScheme;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::hypothesis::{Halfplane, Hypothesis};
use crate::mechanism::CreditedOutput;
use crate::seeding::SimRng;

/// Feasibility and support-vector tolerance.
pub const SVM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SvmFit {
    pub halfplane: Halfplane,
    pub margin: f64,
    /// Positions at distance `margin` from the separator, ascending.
    pub support: Vec<usize>,
}

struct Candidate {
    halfplane: Halfplane,
    margin: f64,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn feasible(h: &Halfplane, margin: f64, points: &[([f64; 2], u8)]) -> bool {
    points.iter().all(|&(p, y)| {
        let d = h.signed_distance(p);
        let d = if y == h.positive_label() { d } else { -d };
        d >= margin - SVM_TOLERANCE
    })
}

/// Max-margin separator of a two-class planar dataset.
pub fn svm_fit(data: &Dataset) -> Result<SvmFit> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut points = Vec::with_capacity(data.len());
    for (index, ex) in data.iter().enumerate() {
        let p = ex.coords().ok_or_else(|| Error::InvalidExample {
            index,
            reason: "SVM needs planar points".into(),
        })?;
        points.push((p, ex.y));
    }
    if !data.has_both_labels() {
        return Err(Error::SingleClass);
    }

    let mut best: Option<Candidate> = None;
    let mut consider = |c: Candidate| {
        if !feasible(&c.halfplane, c.margin, &points) {
            return;
        }
        let better = match &best {
            None => true,
            Some(b) if c.margin > b.margin + SVM_TOLERANCE => true,
            Some(b) if c.margin >= b.margin - SVM_TOLERANCE => {
                let key = |h: &Halfplane| (h.w()[0], h.w()[1], h.b(), h.positive_label());
                key(&c.halfplane) < key(&b.halfplane)
            }
            _ => false,
        };
        if better {
            best = Some(c);
        }
    };

    // One point per class: the perpendicular bisector.
    for &(a, _) in points.iter().filter(|(_, y)| *y == 0) {
        for &(b, _) in points.iter().filter(|(_, y)| *y == 1) {
            let w = sub(b, a);
            let len = norm(w);
            if len == 0.0 {
                continue;
            }
            let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let h = Halfplane::new(w, -dot(w, mid), 1)?;
            consider(Candidate {
                halfplane: h,
                margin: len / 2.0,
            });
        }
    }

    // Two points of one class fix the direction; a third on the other side
    // fixes the width.
    for (iu, &(u, yu)) in points.iter().enumerate() {
        for &(v, yv) in points.iter().skip(iu + 1) {
            if yv != yu {
                continue;
            }
            let along = sub(v, u);
            let len = norm(along);
            if len == 0.0 {
                continue;
            }
            let normal = [-along[1] / len, along[0] / len];
            for &(r, yr) in points.iter().filter(|(_, y)| *y != yu) {
                let mut n = normal;
                let mut dist = dot(n, sub(r, u));
                if dist < 0.0 {
                    n = [-n[0], -n[1]];
                    dist = -dist;
                }
                if dist == 0.0 {
                    continue;
                }
                let offset = -(dot(n, u) + dist / 2.0);
                let h = Halfplane::new(n, offset, yr)?;
                consider(Candidate {
                    halfplane: h,
                    margin: dist / 2.0,
                });
            }
        }
    }

    let best = best.ok_or(Error::NotSeparable)?;
    let support = points
        .iter()
        .enumerate()
        .filter(|(_, (p, _))| {
            (best.halfplane.signed_distance(*p).abs() - best.margin).abs() <= SVM_TOLERANCE
        })
        .map(|(i, _)| i)
        .collect();
    Ok(SvmFit {
        halfplane: best.halfplane,
        margin: best.margin,
        support,
    })
}

/// The SVM compression scheme: credit the support vectors.
pub fn svm_compress(data: &Dataset) -> Result<CreditedOutput> {
    let fit = svm_fit(data)?;
    Ok(CreditedOutput::new(
        Hypothesis::Halfplane(fit.halfplane),
        fit.support,
    ))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SvmScheme;

impl CompressionScheme for SvmScheme {
    fn name(&self) -> String {
        "svm".into()
    }

    fn compress(&self, data: &Dataset, _rng: &mut SimRng) -> Result<Vec<usize>> {
        Ok(svm_fit(data)?.support)
    }

    fn reconstruct(&self, selected: &Dataset) -> Result<Hypothesis> {
        Ok(Hypothesis::Halfplane(svm_fit(selected)?.halfplane))
    }

    fn size_bound(&self, n: usize) -> usize {
        n
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_pair() {
        let s = Dataset::plane(&[([0.0, 0.0], 0), ([0.0, 2.0], 1)]).unwrap();
        let fit = svm_fit(&s).unwrap();
        assert_eq!(fit.halfplane.w(), [0.0, 1.0]);
        assert!((fit.halfplane.b() + 1.0).abs() < 1e-15);
        assert_eq!(fit.halfplane.positive_label(), 1);
        assert_eq!(fit.support, vec![0, 1]);
        assert!((fit.margin - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let one = Dataset::plane(&[([0.0, 0.0], 1), ([1.0, 0.0], 1)]).unwrap();
        assert_eq!(svm_fit(&one).unwrap_err(), Error::SingleClass);
        let xor = Dataset::plane(&[
            ([0.0, 0.0], 0),
            ([1.0, 1.0], 0),
            ([1.0, 0.0], 1),
            ([0.0, 1.0], 1),
        ])
        .unwrap();
        assert_eq!(svm_fit(&xor).unwrap_err().to_string(), "not separable");
        let clash = Dataset::plane(&[([0.0, 0.0], 0), ([0.0, 0.0], 1)]).unwrap();
        assert_eq!(svm_fit(&clash).unwrap_err(), Error::NotSeparable);
    }
}
