use thiserror::Error;

use crate::GroupId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty distribution")]
    EmptyDistribution,

    #[error("belief out of domain: {0} is not in [0, 1]")]
    BeliefOutOfDomain(f64),

    #[error("quantile level {0} is outside (0, 1]")]
    QuantileLevel(f64),

    #[error("threshold {0} is outside [0, 1]")]
    Threshold(f64),

    #[error("barycenter weights must be nonnegative and sum to 1 (got sum {0})")]
    Weights(f64),

    #[error("expected {expected} {what}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("group {0} has no members")]
    EmptyGroup(GroupId),

    #[error("no groups supplied")]
    NoGroups,

    #[error("empty dataset")]
    EmptyData,

    #[error("label {0} is not binary")]
    Label(u8),

    #[error("bin index {index} is outside 1..={bins}")]
    BinIndex { index: usize, bins: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model mode {model:?} does not match configured mode {config:?}")]
    ModeMismatch {
        model: crate::FeatureMode,
        config: crate::FeatureMode,
    },

    #[error("training diverged; reduce eta (step {step}, objective {objective})")]
    Diverged { step: usize, objective: f64 },
}
