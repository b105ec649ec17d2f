//! Experiment runner for `pstable-core`: JSON scenarios, verification runs,
//! parameter sweeps and the p-stability report.

pub mod error;
pub mod output;
pub mod pipeline;
pub mod report;
pub mod scenario;
pub mod sweep;

pub use error::CliError;
pub use pipeline::{run, RunOutput, Summary};
pub use report::{stability_report, Verdict};
pub use scenario::Scenario;
pub use sweep::{sweep, Axis, SweepRow};
