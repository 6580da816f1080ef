//! Batch runner, report writer and self-verification suites behind the
//! `ctqt` binary.

pub mod app;
pub mod report;
pub mod spec;
pub mod verify;

use thiserror::Error;

pub use report::{run_experiments, write_report, Aggregates, Report, TemplateResult};
pub use spec::{parse_config, ExperimentSpec, Format, RunArgs};
pub use verify::{run_suite, Check, Suite};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    /// Process exit status: 1 for bad input, 2 for runtime failures, 3 for a
    /// failed verification suite.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse(_) | Self::Validation(_) => 1,
            Self::Io(_) | Self::Runtime(_) => 2,
            Self::Verification(_) => 3,
        }
    }
}
