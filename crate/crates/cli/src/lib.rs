//! Command-line benchmark driver for fairness-penalized logistic regression.
//!
//! Every subcommand is a function over files under one output root
//! ([`layout::Layout`]), so runs in separate processes compose.

pub mod config;
pub mod files;
pub mod layout;
pub mod ops;
pub mod report;
pub mod results;
pub mod sweep;

pub use config::{Grid, Init, RunConfig};
pub use layout::Layout;
pub use ops::{Env, PostConfig, Source, Split, Splits};
pub use results::{MetricsRow, Store, Tag};
