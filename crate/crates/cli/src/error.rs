use std::path::PathBuf;

use linag_core::casestudy::{ParamError, SimError};
use linag_core::contracts::{ContractError, FormatError};
use linag_core::refinement::{ExtendError, RefinementError};
use linag_core::satisfaction::SatisfactionError;
use thiserror::Error;

/// Process exit codes. Codes 5–7 are only produced by `casestudy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exit {
    Ok = 0,
    /// The property was checked and does not hold.
    Failed = 1,
    /// Unreadable, malformed or inconsistent input.
    Invalid = 2,
    Solver = 3,
    /// Outside the enumeration limits of the extendability check.
    Unsupported = 4,
    RefinementFailed = 5,
    SatisfactionFailed = 6,
    SimulationViolation = 7,
    /// Could not write an output file.
    Output = 8,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Format(_) | CliError::Params(_) | CliError::Invalid(_) => Exit::Invalid,
            CliError::Solver(_) => Exit::Solver,
            CliError::Output { .. } => Exit::Output,
        }
    }

    pub fn output(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Output { path, source }
    }
}

impl From<ContractError> for CliError {
    fn from(e: ContractError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<RefinementError> for CliError {
    fn from(e: RefinementError) -> Self {
        match e {
            RefinementError::Lp(e) => CliError::Solver(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<SatisfactionError> for CliError {
    fn from(e: SatisfactionError) -> Self {
        match e {
            SatisfactionError::Lp(e) => CliError::Solver(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<ExtendError> for CliError {
    fn from(e: ExtendError) -> Self {
        match e {
            ExtendError::Dimension { .. } => CliError::Invalid(e.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Params(p) => CliError::Params(p),
            other => CliError::Invalid(other.to_string()),
        }
    }
}
