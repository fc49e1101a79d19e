//! Manifest-driven front end: parse a run manifest, evaluate the requested
//! analyses at each sample point, and write a JSON report.

use std::fmt;

pub mod explain;
pub mod manifest;
pub mod pipeline;
pub mod report;

pub use manifest::{resolve, Manifest, Overrides, Plan, Ring};
pub use report::Report;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad manifest or input data (exit 2).
    Manifest(String),
    /// A point hit a pole or a degenerate matrix (exit 3).
    Evaluation(String),
    /// An unreadable report (exit 2).
    Report(String),
    Io(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Manifest(_) | CliError::Report(_) => 2,
            CliError::Evaluation(_) => 3,
            CliError::Io(_) | CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Manifest(m) => write!(f, "manifest error: {m}"),
            CliError::Evaluation(m) => write!(f, "evaluation singularity: {m}"),
            CliError::Report(m) => write!(f, "cannot parse report: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Parses, resolves and evaluates a manifest text.
pub fn run_manifest(text: &str, ov: &Overrides, timing: bool) -> Result<Report, CliError> {
    let plan = resolve(Manifest::parse(text)?, ov)?;
    pipeline::run(&plan, timing)
}
