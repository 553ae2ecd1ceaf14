//! Counterfactual credit attribution, semi-private learning and sample
//! DP-compression over small concept classes, with exact and Monte Carlo
//! audits of the corresponding stability notions.
// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod compression;
pub mod data;
pub mod distribution;
pub mod error;
pub mod hypothesis;
pub mod mechanism;
pub mod seeding;
pub mod selection;
pub mod semidp;

pub use data::{Dataset, LabeledExample, Point};
pub use distribution::{
    approx_indistinguishable, hockey_stick_divergence, statistical_slack, ClosenessReport,
    DistributionKind, FiniteDistribution, PrivacyParams,
};
pub use error::{Error, Result};
pub use hypothesis::{empirical_risk, population_risk, Halfplane, Hypothesis, HypothesisKey};
pub use mechanism::{CreditMechanism, CreditedOutput, OutputKey};
