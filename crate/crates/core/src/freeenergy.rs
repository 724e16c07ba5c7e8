//! Leading and subleading free energies `F⁰`, `F¹` of
//! `Z_N = ∫ exp(−N Tr V_t) dμ^N`, by symbolic integration along `α ↦ αt`.

use num_complex::Complex64;
use serde::Serialize;

use crate::fluctuation::OperatorContext;
use crate::mapcount::{census_series, MapError};
use crate::ncpoly::{Polynomial, Potential};
use crate::scalar::{Coeff, Scalar};
use crate::sdsolve::{Moments, SeriesState, SolveError};
use crate::series::{MultiIndex, Series};

/// `G = Σ_j w_j t_{c(j)} f(q_j)` with `f` known to order `K − 1`.
fn weighted_sum<S: Scalar>(
    v: &Potential<S>,
    order: usize,
    mut f: impl FnMut(&Polynomial<Series<S>>) -> Result<Series<S>, SolveError>,
) -> Result<Series<S>, SolveError> {
    let mut g = Series::zero_to(order);
    for term in v.terms() {
        let val = f(&Polynomial::word(term.word.clone()))?;
        g.add_assign_ref(&Series::var(term.coupling).mul_ref(&val).scale(&term.weight));
    }
    Ok(g.truncate(order))
}

/// `−∫₀¹ G(αt) dα` where `G` carries one explicit factor of `t`: the
/// total-order-`n` part is divided by `n`.
fn integrate_line<S: Scalar>(g: &Series<S>) -> Series<S> {
    -g.radial_integral()
}

/// `F⁰ = −∫₀¹ μ_{αt}(Σ t_i q_i) dα`, to total order `K`.
pub fn f0<S: Scalar>(v: &Potential<S>, order: usize) -> Result<Series<S>, SolveError> {
    if order == 0 {
        return Ok(Series::zero_to(0));
    }
    let mu = SeriesState::new(v, order - 1);
    let g = weighted_sum(v, order, |p| mu.expect(p, order - 1))?;
    Ok(integrate_line(&g))
}

/// `F¹ = −∫₀¹ φ_{αt}(Ξ_{αt}⁻¹ Σ t_i q_i) dα`, to total order `K`.
pub fn f1<S: Scalar>(v: &Potential<S>, order: usize) -> Result<Series<S>, SolveError> {
    if order == 0 {
        return Ok(Series::zero_to(0));
    }
    let mu = SeriesState::new(v, order - 1);
    let ctx = OperatorContext::series(v, &mu);
    let g = weighted_sum(v, order, |p| ctx.second_order_correction(p))?;
    Ok(integrate_line(&g))
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientCheck {
    pub genus: usize,
    pub index: Vec<u8>,
    pub computed: String,
    pub maps: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeEnergyReport<S: Scalar> {
    #[serde(skip)]
    pub f0: Series<S>,
    #[serde(skip)]
    pub f1: Series<S>,
    pub order: usize,
    /// Highest total order compared against the census (limited by its cap).
    pub checked_order: usize,
    pub cross_check: Vec<CoefficientCheck>,
}

impl<S: Scalar> FreeEnergyReport<S> {
    pub fn passed(&self) -> bool {
        self.cross_check.iter().all(|c| c.passed)
    }
}

/// Largest order whose vacuum configurations all fit under the census cap.
pub fn census_reach<S: Scalar>(v: &Potential<S>, order: usize, cap: usize) -> usize {
    let widest = v.terms().iter().map(|t| t.word.degree()).max().unwrap_or(0);
    if widest == 0 {
        return order;
    }
    order.min(cap / widest)
}

/// `F⁰`, `F¹` to order `K`, each compared coefficientwise with the genus-0
/// and genus-1 vacuum map generating functions up to the census reach.
pub fn free_energy<S: Scalar>(v: &Potential<S>, order: usize, cap: usize) -> Result<FreeEnergyReport<S>, SolveError> {
    let f0 = f0(v, order)?;
    let f1 = f1(v, order)?;
    let checked = census_reach(v, order, cap);
    let mut cross_check = Vec::new();
    for (genus, f) in [(0, &f0), (1, &f1)] {
        let maps = census_series(&[], v, checked, genus, cap).map_err(|e: MapError| SolveError::from(e))?;
        let mut idx: Vec<MultiIndex> = f.truncate(checked).terms().map(|(i, _)| *i).collect();
        idx.extend(maps.terms().map(|(i, _)| *i));
        idx.sort();
        idx.dedup();
        for i in idx {
            let (a, b) = (f.coefficient(&i), maps.coefficient(&i));
            cross_check.push(CoefficientCheck {
                genus,
                index: i.to_vec(v.num_couplings()),
                computed: a.to_string(),
                maps: b.to_string(),
                passed: a == b,
            });
        }
    }
    Ok(FreeEnergyReport {
        f0,
        f1,
        order,
        checked_order: checked,
        cross_check,
    })
}

/// The series side of `log Z_N ≈ N² F⁰ + F¹`, for comparison with sampled
/// thermodynamic integration.
#[derive(Clone, Debug)]
pub struct ThermoReference<S: Scalar> {
    pub f0: Series<S>,
    pub f1: Series<S>,
    pub couplings: Vec<String>,
}

impl<S: Scalar> ThermoReference<S> {
    pub fn new(v: &Potential<S>, order: usize) -> Result<Self, SolveError> {
        Ok(ThermoReference {
            f0: f0(v, order)?,
            f1: f1(v, order)?,
            couplings: v.coupling_names(),
        })
    }

    /// `(F⁰(t), F¹(t))` at numeric couplings.
    pub fn eval(&self, t: &[Complex64]) -> (Complex64, Complex64) {
        (self.f0.eval(t), self.f1.eval(t))
    }

    /// `N² F⁰(t) + F¹(t)`.
    pub fn log_z(&self, n: usize, t: &[Complex64]) -> Complex64 {
        let (a, b) = self.eval(t);
        a * (n * n) as f64 + b
    }
}

pub fn thermo_reference<S: Scalar>(v: &Potential<S>, order: usize) -> Result<ThermoReference<S>, SolveError> {
    ThermoReference::new(v, order)
}
