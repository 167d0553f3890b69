//! Experiment harness for [`acflow_core`]: configuration files, the
//! diagnostics CSV, AC-SNAP snapshots, interface polylines, run and sweep
//! orchestration with pass/fail reports, and the standalone self-checks.

pub mod checks;
pub mod config;
pub mod error;
pub mod harness;
pub mod output;
pub mod selftest;
pub mod snapshot;

pub use checks::Check;
pub use config::{ExperimentConfig, Scenario};
pub use error::{HarnessError, Result};
pub use harness::{run_experiment, sweep, RunOutcome, SweepOutcome};
pub use selftest::{kernel_selftest, selftest};
