//! Library side of the `mmwb` command: input parsing, result schemas, run
//! manifests, the subcommand implementations and the `verify` suite.

pub mod commands;
pub mod input;
pub mod manifest;
pub mod output;
pub mod schema;
pub mod verify;

use mmwb_core::mapcount::MapError;
use mmwb_core::ncpoly::NcError;
use mmwb_core::sdsolve::SolveError;
use mmwb_mc::McError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("potential is not self-adjoint: {0}")]
    SelfAdjointness(String),
    #[error(transparent)]
    Polynomial(NcError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Maps(#[from] MapError),
    #[error(transparent)]
    MonteCarlo(#[from] McError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<NcError> for CliError {
    fn from(e: NcError) -> Self {
        match e {
            NcError::Parse { pos, msg } => CliError::Parse { pos, msg },
            NcError::SelfAdjointness(m) => CliError::SelfAdjointness(m),
            other => CliError::Polynomial(other),
        }
    }
}
