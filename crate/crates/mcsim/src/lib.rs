//! Monte Carlo sampling of `e^{−N Tr V(A)} dμ^N(A)` over `m`-tuples of
//! `N × N` Hermitian matrices, optionally restricted to operator norms
//! below a cutoff `L`.
//!
//! Exact GUE draws cover `V = 0`. Otherwise Metropolis runs on the
//! eigenvalue Coulomb gas for one matrix and on full matrices for several;
//! Langevin (MALA) always moves full matrices along `−(A_i + D_i V(A))`.

mod checks;
mod config;
mod matrix;
mod run;
mod sampler;
mod stats;
mod trace;
mod tridiag;

pub use checks::{
    convexity_probe, convexity_scan, fluctuation_report, fluctuation_test, gauss_legendre, tail_test,
    thermo_integration, ConvexityReport, FluctuationReport, TailReport, TailRow, ThermoNode, ThermoReport,
};
pub use config::{MatrixEnsembleConfig, Representation, SamplerKind};
pub use matrix::{gue_matrix, haar_unitary, rotate_spectrum, CMatrix, WordEvaluator};
pub use run::{run, Observable, RunReport, SampleTrace};
pub use sampler::{
    collect_rows, coulomb_log_density, detailed_balance_defect, energy_and_force, sample_gibbs, sample_gue,
    AuditRecord, Chain, ChainOutput, Draw,
};
pub use stats::{effective_sample_size, mean, shape, variance, variance_with_error, SampleStats, Z99};
pub use trace::{read_trace, write_trace, MAGIC};
pub use tridiag::Tridiagonal;

use mmwb_core::ncpoly::NcError;
use mmwb_core::sdsolve::SolveError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("acceptance collapse: {:.2}% of {proposals} proposals accepted, below 1%; reduce the step size", rate * 100.0)]
    AcceptanceCollapse { rate: f64, proposals: u64 },
    #[error(transparent)]
    Potential(#[from] NcError),
    #[error(transparent)]
    Series(#[from] SolveError),
    #[error("trace file: {0}")]
    Trace(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
