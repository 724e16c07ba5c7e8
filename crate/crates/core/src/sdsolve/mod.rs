//! Schwinger–Dyson equation: `μ(X_i P) = μ⊗μ(∂_i P) − μ(D_i V · P)`.
//!
//! The series solver treats the couplings as formal variables and fills a
//! memo lazily; the numeric solver iterates the same rearrangement at fixed
//! couplings. Both expose the [`Moments`] interface used by the fluctuation
//! operators.

mod numeric;
mod series_state;
mod wick;

pub use numeric::NumericState;
pub use series_state::SeriesState;
pub use wick::{wick_finite_n, InverseNPolynomial};

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::mapcount::{census_series, MapError};
use crate::ncpoly::{Monomial, NcError, Polynomial, Potential, TensorPolynomial};
use crate::scalar::{Coeff, Scalar};
use crate::series::Series;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("fixed point did not converge after {iterations} sweeps (last change {change:e}); couplings are likely outside the perturbative regime")]
    NoConvergence { iterations: usize, change: f64 },
    #[error("moment bound violated: |μ(x{color}^{degree})| = {value:e} exceeds {bound}^{degree}")]
    MomentBoundViolation {
        color: usize,
        degree: usize,
        value: f64,
        bound: f64,
    },
    #[error("moment of degree {requested} requested beyond the degree cap {cap}")]
    DegreeCap { requested: usize, cap: usize },
    #[error("degree cap {cap} too small: at least {required} is needed for the recursion to close")]
    CapTooSmall { cap: usize, required: usize },
    #[error("{0} is only available for formal series in the couplings")]
    SeriesOnly(&'static str),
    #[error(transparent)]
    Input(#[from] NcError),
    #[error(transparent)]
    Map(#[from] Box<MapError>),
}

impl From<MapError> for SolveError {
    fn from(e: MapError) -> Self {
        SolveError::Map(Box::new(e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    Series,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    pub mode: SolveMode,
    /// Series truncation order `K`.
    pub order: usize,
    /// Largest moment degree stored (and, in numeric mode, solved for).
    pub max_degree: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Step towards each new iterate, in `(0, 1]`.
    pub damping: f64,
    /// `C` in the check `|μ(X_i^d)| ≤ C^d`.
    pub moment_bound: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SolveMode::Series,
            order: 4,
            max_degree: 8,
            tol: 1e-13,
            max_iter: 10_000,
            damping: 0.5,
            moment_bound: 8.0,
        }
    }
}

/// A tracial state: moments of words, as scalars or truncated series.
pub trait Moments<C: Coeff>: Send + Sync {
    /// `μ(w)` known to total coupling order `precision` (clamped to the
    /// state's own order).
    fn moment(&self, w: &Monomial, precision: usize) -> Result<C, SolveError>;

    /// Highest coupling order available.
    fn order(&self) -> usize;

    fn colors(&self) -> usize;

    /// `μ(P)` to the given precision.
    fn expect(&self, p: &Polynomial<C>, precision: usize) -> Result<C, SolveError> {
        let mut acc = C::zero();
        for (w, c) in p.terms() {
            let v = c.valuation();
            if v > precision {
                continue;
            }
            let m = self.moment(w, precision - v)?;
            acc.add_assign_ref(&c.mul_ref(&m).truncate(precision));
        }
        Ok(acc.truncate(precision))
    }

    /// `(μ⊗μ)(T)`.
    fn expect_tensor(&self, t: &TensorPolynomial<C>, precision: usize) -> Result<C, SolveError> {
        let mut acc = C::zero();
        for (a, b, c) in t.terms() {
            let v = c.valuation();
            if v > precision {
                continue;
            }
            let p = precision - v;
            let ma = self.moment(a, p)?;
            if ma.is_zero() {
                continue;
            }
            let mb = self.moment(b, p)?;
            acc.add_assign_ref(&c.mul_ref(&ma.mul_ref(&mb)).truncate(precision));
        }
        Ok(acc.truncate(precision))
    }

    /// `(μ⊗I + I⊗μ)(T)`.
    fn contract_both(&self, t: &TensorPolynomial<C>, precision: usize) -> Result<Polynomial<C>, SolveError> {
        let mut out = Polynomial::zero();
        for (a, b, c) in t.terms() {
            let v = c.valuation();
            if v > precision {
                continue;
            }
            let ma = self.moment(a, precision - v)?;
            out.add_term(b.clone(), c.mul_ref(&ma).truncate(precision));
            let mb = self.moment(b, precision - v)?;
            out.add_term(a.clone(), c.mul_ref(&mb).truncate(precision));
        }
        Ok(out)
    }

    /// `(I⊗μ)(T)`.
    fn contract_right(&self, t: &TensorPolynomial<C>, precision: usize) -> Result<Polynomial<C>, SolveError> {
        let mut out = Polynomial::zero();
        for (a, b, c) in t.terms() {
            let v = c.valuation();
            if v > precision {
                continue;
            }
            let mb = self.moment(b, precision - v)?;
            out.add_term(a.clone(), c.mul_ref(&mb).truncate(precision));
        }
        Ok(out)
    }
}

/// Builds the tracial state for `V` in the requested mode, eagerly filling
/// every canonical word of degree `≤ max_degree`.
pub fn solve_series<S: Scalar>(v: &Potential<S>, cfg: &SolverConfig) -> Result<SeriesState<S>, SolveError> {
    let state = SeriesState::new(v, cfg.order);
    state.populate(cfg.max_degree)?;
    Ok(state)
}

pub fn solve_numeric<S: Scalar>(v: &Potential<S>, cfg: &SolverConfig) -> Result<NumericState, SolveError> {
    NumericState::solve(v, cfg)
}

/// All cyclically canonical words of degree `1..=max_degree` in `m` letters.
pub fn canonical_words(m: usize, max_degree: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut word: Vec<u8> = Vec::new();
    fn rec(m: usize, left: usize, word: &mut Vec<u8>, out: &mut Vec<Monomial>) {
        if !word.is_empty() {
            let w = Monomial::from_indices(word);
            if w.cyclic_canonical() == w {
                out.push(w);
            }
        }
        if left == 0 {
            return;
        }
        for l in 0..m as u8 {
            // A canonical word starts with its smallest letter.
            if !word.is_empty() && l < word[0] {
                continue;
            }
            word.push(l);
            rec(m, left - 1, word, out);
            word.pop();
        }
    }
    rec(m, max_degree, &mut word, &mut out);
    out.sort();
    out
}

/// Largest `|μ⊗μ(∂_i P) − μ((X_i + D_i V) P)|` over canonical words `P`
/// with `deg(X_i P) ≤ max_degree`, for a numeric state.
pub fn sd_residual_numeric<S: Scalar, M: Moments<S>>(
    mu: &M,
    v: &Potential<S>,
    max_degree: usize,
) -> Result<f64, SolveError> {
    let grad = v.numeric_gradient()?;
    let m = mu.colors().max(v.colors());
    let mut worst = 0.0f64;
    for p in std::iter::once(Monomial::unit()).chain(canonical_words(m, max_degree.saturating_sub(1))) {
        for i in crate::ncpoly::Color::all(m) {
            let lhs = Polynomial::<S>::word(p.clone()).partial(i);
            let lhs = mu.expect_tensor(&lhs, usize::MAX)?;
            let xp = Polynomial::<S>::word(Monomial::letter(i).concat(&p));
            let dvp = grad[i.index()].mul_ref(&Polynomial::word(p.clone()));
            let rhs = mu.expect(&(&xp + &dvp), usize::MAX)?;
            worst = worst.max((lhs - rhs).abs_f64());
        }
    }
    Ok(worst)
}

/// Residual of the defining equation of each canonical word `w = X_i P`
/// (split at its first letter), for `deg w ≤ max_degree`. At a degree cap the
/// numeric solver satisfies exactly these; the other rotations of a class
/// carry the closure error of the frozen Gaussian tail.
pub fn sd_residual_defining<S: Scalar, M: Moments<S>>(
    mu: &M,
    v: &Potential<S>,
    max_degree: usize,
) -> Result<f64, SolveError> {
    let grad = v.numeric_gradient()?;
    let m = mu.colors().max(v.colors());
    let mut worst = 0.0f64;
    for w in canonical_words(m, max_degree) {
        let i = crate::ncpoly::Color::from_index(w.letters()[0] as usize);
        let p = Monomial::from_indices(&w.letters()[1..]);
        let lhs = mu.expect_tensor(&Polynomial::<S>::word(p.clone()).partial(i), usize::MAX)?;
        let dvp = grad[i.index()].mul_ref(&Polynomial::word(p));
        let rhs = mu.expect(&(&Polynomial::word(w) + &dvp), usize::MAX)?;
        worst = worst.max((lhs - rhs).abs_f64());
    }
    Ok(worst)
}

/// Same residual in series mode; returns the words whose residual has a
/// nonzero coefficient of order `≤ K`.
pub fn sd_residual_series<S: Scalar>(
    mu: &SeriesState<S>,
    v: &Potential<S>,
    max_degree: usize,
) -> Result<Vec<Monomial>, SolveError> {
    let grad = v.series_gradient();
    let k = mu.order();
    let m = mu.colors();
    let mut bad = Vec::new();
    for p in std::iter::once(Monomial::unit()).chain(canonical_words(m, max_degree.saturating_sub(1))) {
        for i in crate::ncpoly::Color::all(m) {
            let pp = Polynomial::<Series<S>>::word(p.clone());
            let lhs = mu.expect_tensor(&pp.partial(i), k)?;
            let xp = Polynomial::word(Monomial::letter(i).concat(&p));
            let rhs = mu.expect(&(&xp + &grad[i.index()].mul_ref(&pp)), k)?;
            if !(lhs - rhs).truncate(k).is_zero() {
                bad.push(Monomial::letter(i).concat(&p));
            }
        }
    }
    Ok(bad)
}

/// Outcome of comparing a moment series with the planar-map count.
#[derive(Clone, Debug, PartialEq)]
pub struct MapComparison<S: Scalar> {
    pub query: Monomial,
    pub solver: Series<S>,
    pub maps: Series<S>,
    pub first_mismatch: Option<crate::series::MultiIndex>,
}

impl<S: Scalar> MapComparison<S> {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Compares `μ_t(P)` with `Σ_k Π (−t_i)^{k_i}/k_i! · M_k(P)` coefficientwise.
pub fn moments_vs_maps<S: Scalar>(
    mu: &SeriesState<S>,
    v: &Potential<S>,
    p: &Monomial,
    order: usize,
    cap: usize,
) -> Result<MapComparison<S>, SolveError> {
    let solver = mu.moment(p, order)?;
    let maps = if p.is_unit() {
        Series::from_base(S::one()).truncate(order)
    } else {
        census_series(std::slice::from_ref(p), v, order, 0, cap)?
    };
    let first_mismatch = first_difference(&solver, &maps, order);
    Ok(MapComparison {
        query: p.clone(),
        solver,
        maps,
        first_mismatch,
    })
}

/// The lowest multi-index (total order `≤ order`) where two series differ.
pub fn first_difference<S: Scalar>(a: &Series<S>, b: &Series<S>, order: usize) -> Option<crate::series::MultiIndex> {
    let diff = (a.clone() - b.clone()).truncate(order);
    let first = diff.terms().next().map(|(i, _)| *i);
    first
}
