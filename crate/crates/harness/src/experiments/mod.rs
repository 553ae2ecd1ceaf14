pub mod boost_learn;
pub mod cca_audit;
pub mod reduction;
pub mod rr_boost;
pub mod svm_demo;

use crate::config::Config;
use crate::error::{config_err, Result};
use crate::output::Report;

pub const NAMES: &[&str] = &["rr_boost", "cca_audit", "boost_learn", "reduction_demo", "svm_demo"];

pub fn run(name: &str, cfg: &Config) -> Result<Report> {
    match name {
        "rr_boost" => rr_boost::run(cfg),
        "cca_audit" => cca_audit::run(cfg),
        "boost_learn" => boost_learn::run(cfg),
        "reduction_demo" => reduction::run(cfg),
        "svm_demo" => svm_demo::run(cfg),
        other => Err(config_err(format!(
            "unknown experiment {other:?}; expected one of {}",
            NAMES.join(", ")
        ))),
    }
}
