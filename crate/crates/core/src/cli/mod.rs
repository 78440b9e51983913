//! Experiment files, sweep output and the built-in self-test behind the
//! `jncld` binary.

pub mod config;
pub mod run;
pub mod selftest;

pub use config::{load_experiment, parse_experiment, ConfigError, ExperimentBlock, ExperimentFile};
pub use run::{run, BlockResult, Gap, RunError, RunOptions, RunSummary};
pub use selftest::{selftest, SelftestOptions, SelftestReport, SuiteResult};
