//! Experiment harness for the `aligntilt` library: configuration, the six
//! reproducible experiments, CSV/JSON reports, and the `aligntilt` CLI.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod report;

pub use config::{Experiment, ExperimentConfig};
pub use error::{ExperimentError, Result};
pub use experiments::run;
pub use report::{persist, Check, ExperimentOutput, ExperimentReport, Table};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
