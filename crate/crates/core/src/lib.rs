//! Symbolic and combinatorial core of the matrix-model workbench.
//!
//! The algebra is generic over a coefficient ring ([`scalar::Coeff`]); the
//! aliases below fix the two backends used in practice.

pub mod fluctuation;
pub mod freeenergy;
pub mod mapcount;
pub mod ncpoly;
pub mod scalar;
pub mod sdsolve;
pub mod series;

pub use ncpoly::{Color, Monomial, Polynomial, Potential};
pub use scalar::{Coeff, GaussRational, Scalar};
pub use series::{MultiIndex, Series};

pub use num_complex::Complex64;

/// Exact backend: Gaussian rationals.
pub type Exact = GaussRational;
/// Floating backend: double precision complex numbers.
pub type Float = Complex64;

pub type ExactSeries = Series<Exact>;
pub type FloatSeries = Series<Float>;
pub type ExactPolynomial = Polynomial<Exact>;
pub type FloatPolynomial = Polynomial<Float>;
pub type ExactPotential = Potential<Exact>;
pub type FloatPotential = Potential<Float>;
