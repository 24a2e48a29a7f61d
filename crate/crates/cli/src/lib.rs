//! Batch front end: job configs, expression parsing, reports and grids.

pub mod config;
pub mod output;
pub mod parse;
pub mod report;
pub mod run;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use zerofree::Error;

pub use config::{JobConfig, OutputPaths, RegionSpec};
pub use report::{Report, VerifyReport};
pub use run::{demo_config, demo_names, run_job, verify_expr, JobOutcome};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {message}\n{rendered}")]
    Parse { message: String, rendered: String },
    #[error("cannot lower '{0}': {1}")]
    Lower(String, parse::LowerError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub(crate) fn parse(input: &str, e: parse::ParseError) -> Self {
        CliError::Parse {
            message: e.to_string(),
            rendered: e.render(input),
        }
    }
}

/// Outcome class of a run; its discriminant is the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitClass {
    Ok = 0,
    Other = 1,
    Parse = 2,
    /// The input has zeros where it must not.
    Precondition = 3,
    Nonconvergence = 4,
    DegreeExceeded = 5,
}

impl ExitClass {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of(e: &Error) -> Self {
        match e {
            Error::Precondition(_) => ExitClass::Precondition,
            Error::Nonconvergence(_)
            | Error::DegenerateGeometry(_)
            | Error::MapInversion { .. }
            | Error::Conditioning(_) => ExitClass::Nonconvergence,
            Error::DegreeExceeded { .. } => ExitClass::DegreeExceeded,
            Error::InvalidArgument(_)
            | Error::Evaluation { .. }
            | Error::ZeroOnContour { .. }
            | Error::Consistency(_) => ExitClass::Other,
        }
    }
}

/// Parses and lowers a function expression.
pub fn parse_function(src: &str) -> Result<zerofree::FuncExprF64, CliError> {
    let ast = parse::parse_expr(src).map_err(|e| CliError::parse(src, e))?;
    parse::lower(&ast).map_err(|e| CliError::Lower(src.to_string(), e))
}
