use thiserror::Error;

/// Errors raised by mechanisms, audits and calculators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid example at position {index}: {reason}")]
    InvalidExample { index: usize, reason: String },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("hypothesis {hypothesis} cannot evaluate point {point}")]
    DomainMismatch { hypothesis: String, point: String },

    #[error("not separable")]
    NotSeparable,

    #[error("single-class input: both labels are required")]
    SingleClass,

    #[error("not realizable")]
    NotRealizable,

    #[error("weak learner failed in round {round} after {attempts} attempts")]
    WeakLearnerFailed { round: usize, attempts: usize },

    #[error("public data inconsistent")]
    PublicDataInconsistent,

    #[error("selection size k = {k} exceeds sample size n = {n}")]
    SelectionTooLarge { k: usize, n: usize },

    #[error("n = {n} is too large for exact enumeration (limit {limit}); use the Monte Carlo audit instead")]
    TooLargeForExact { n: usize, limit: usize },

    #[error("mechanism `{0}` has no exact output distribution")]
    NoExactDistribution(String),

    #[error("zero trials requested")]
    ZeroTrials,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
