//! Library surface of the `ddopt` command-line tool, split out so the
//! integration tests can drive the recipes directly.

// Parameter checks are written `!(x > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod recipes;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("feasibility error: {0}")]
    Feasibility(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// Process exit code contract: 0 ok, 2 config, 3 feasibility,
    /// 4 numerical failure, 1 everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Feasibility(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<ddopt::OptimizeError> for CliError {
    fn from(e: ddopt::OptimizeError) -> Self {
        use ddopt::OptimizeError as E;
        match &e {
            E::Infeasible { .. } | E::NoFeasiblePulseCount { .. } => {
                CliError::Feasibility(e.to_string())
            }
            E::InvalidParameter(_) => CliError::Config(e.to_string()),
            E::Quadrature(_) | E::Spectra(_) | E::Sequence(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ddopt::QuadError> for CliError {
    fn from(e: ddopt::QuadError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ddopt::SpectraError> for CliError {
    fn from(e: ddopt::SpectraError) -> Self {
        match &e {
            ddopt::SpectraError::DivergentMeasure | ddopt::SpectraError::Quadrature(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}
