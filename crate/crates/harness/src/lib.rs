//! Experiment harness for the fractional Burgers shock study: versioned
//! configs, reproducible output directories and the `fracburgers` CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

pub use config::ExperimentConfig;
pub use error::{HarnessError, HarnessResult};
