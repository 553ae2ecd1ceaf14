//! Named, seeded experiments over `cca_core`, with CSV/JSON reports.
//!
//! Every experiment is a pure function of its [`Config`]: per-trial random
//! streams come from `cca_core::seeding::derive_seed(seed, stream, trial)`
//! on ChaCha8, so reruns reproduce their output byte for byte.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::Config;
pub use error::{HarnessError, Result};
pub use output::{write_report, Check, Report};
