//! Max-margin separator, its support set, and what single removals do to it.

use cca_core::compression::svm_fit;
use cca_core::Dataset;
use serde::Serialize;
use serde_json::json;

use super::cca_audit::svm_example;
use crate::config::Config;
use crate::error::Result;
use crate::output::{Check, Report};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separator {
    pub w: [f64; 2],
    pub b: f64,
    pub positive_label: u8,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Removal {
    pub index: usize,
    pub support_vector: bool,
    /// `None` when the reduced sample has no separator (one class left).
    pub separator: Option<Separator>,
    pub identical: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Demo {
    pub points: Vec<([f64; 2], u8)>,
    pub separator: Separator,
    pub support: Vec<usize>,
    pub removals: Vec<Removal>,
}

impl Demo {
    pub fn non_support_removals_identical(&self) -> bool {
        self.removals.iter().filter(|r| !r.support_vector).all(|r| r.identical)
    }

    pub fn support_removals_change(&self) -> bool {
        self.removals
            .iter()
            .filter(|r| r.support_vector && r.separator.is_some())
            .all(|r| !r.identical)
    }
}

pub fn demo(s: &Dataset) -> Result<Demo> {
    let fit = svm_fit(s)?;
    let sep = |f: &cca_core::compression::SvmFit| Separator {
        w: f.halfplane.w(),
        b: f.halfplane.b(),
        positive_label: f.halfplane.positive_label(),
        margin: f.margin,
    };
    let removals = (0..s.len())
        .map(|i| -> Result<Removal> {
            let support_vector = fit.support.contains(&i);
            Ok(match svm_fit(&s.omit(i)?) {
                Ok(f) => Removal {
                    index: i,
                    support_vector,
                    identical: f.halfplane == fit.halfplane,
                    separator: Some(sep(&f)),
                    error: None,
                },
                Err(e) => Removal {
                    index: i,
                    support_vector,
                    separator: None,
                    identical: false,
                    error: Some(e.to_string()),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Demo {
        points: s.iter().map(|e| (e.coords().unwrap_or([f64::NAN; 2]), e.y)).collect(),
        separator: sep(&fit),
        support: fit.support,
        removals,
    })
}

pub fn run(cfg: &Config) -> Result<Report> {
    // No randomness, but every experiment takes a seed.
    cfg.seed()?;
    let example = demo(&svm_example())?;
    let pair = demo(&Dataset::plane(&[([0.0, 0.0], 0), ([0.0, 2.0], 1)])?)?;
    let checks = vec![
        Check::new(
            "example support",
            example.support == [1, 2, 5],
            format!("support {:?}", example.support),
        ),
        Check::new(
            "non-support removals",
            example.non_support_removals_identical(),
            "separator identical after each removal",
        ),
        Check::new(
            "support removals",
            example.support_removals_change(),
            "separator moves after each removal",
        ),
        Check::new(
            "two points",
            pair.support == [0, 1] && (pair.separator.b + pair.separator.w[1]).abs() < 1e-12,
            "separator y = 1, both points support",
        ),
    ];
    Ok(Report {
        csv: None,
        json: Some(json!({ "example": example, "pair": pair })),
        checks,
    })
}
