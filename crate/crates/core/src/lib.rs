//! Fair binary classification through one-dimensional optimal transport.
//!
//! Group belief distributions are compared with exact empirical Wasserstein-1
//! distances ([`ot`]); disparities are measured by [`metrics`]; a logistic
//! model ([`logistic`]) is trained with a Wasserstein penalty toward the
//! group barycenter ([`trainer`]) or its beliefs are remapped by quantile
//! matching ([`postprocess`]).

pub mod dataset;
pub mod error;
pub mod logistic;
pub mod metrics;
pub mod ot;
pub mod postprocess;
pub mod trainer;

pub use dataset::{Dataset, FeatureMode, FeatureSchema, GroupId};
pub use error::{Error, Result};
pub use logistic::{Design, GdOptions, ModelParams};
pub use metrics::{GroupedBeliefs, LabeledBeliefs, MetricSet};
pub use ot::{Coupling, EmpiricalDist, ThresholdGrid};
pub use postprocess::{QuantileBins, QuantileMatcher, Target};
pub use trainer::{TrainConfig, TrainOutcome, TrajectoryPoint};
