//! Noncommutative polynomials in `X_1..X_m` and their calculus.

mod monomial;
mod parse;
mod poly;
mod potential;
mod tensor;

pub use monomial::{Color, Monomial, MAX_COLORS};
pub use parse::{parse_expression, parse_monomial, parse_polynomial, parse_potential, ParsedPolynomial, ParsedTerm};
pub use poly::Polynomial;
pub use potential::{Coupling, Potential, PotentialTerm};
pub use tensor::{TensorPolynomial, TripleTensorPolynomial};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NcError {
    #[error("colour {color} out of range 1..={colors}")]
    ColorOutOfRange { color: usize, colors: usize },
    #[error("norm base A must exceed 1, got {0}")]
    NormBase(f64),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("potential is not self-adjoint: {0}")]
    SelfAdjointness(String),
    #[error("coupling `{0}` has no numeric value")]
    MissingCouplingValue(String),
    #[error("at most {max} couplings are supported, got {got}")]
    TooManyCouplings { max: usize, got: usize },
}
