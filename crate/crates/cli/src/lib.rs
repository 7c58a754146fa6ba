//! Configuration-driven runs of the spin-bath experiments.
//!
//! A run reads one JSON [`RunConfig`], computes on a dedicated worker pool and
//! writes data files plus a `report.json` with a SHA-256 manifest into the
//! output directory.

pub mod config;
pub mod report;
pub mod runner;
pub mod schema;

pub use config::{ConfigError, Experiment, RunConfig};
pub use report::RunReport;
pub use runner::{exit, run, Outcome, RunError, RunOptions};
