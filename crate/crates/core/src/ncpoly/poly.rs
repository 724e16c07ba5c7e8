use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{Coeff, Scalar, EXACT};

use super::tensor::{TensorPolynomial, TripleTensorPolynomial};
use super::{Color, Monomial, NcError};

/// A noncommutative polynomial with coefficients in `C`.
#[derive(Clone, PartialEq)]
pub struct Polynomial<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> Default for Polynomial<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> Polynomial<C> {
    pub fn zero() -> Self {
        Polynomial { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(Monomial::unit(), c)
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn word(m: Monomial) -> Self {
        Self::monomial(m, C::one())
    }

    pub fn var(c: Color) -> Self {
        Self::word(Monomial::letter(c))
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, C)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c·m`, dropping the entry if the coefficient cancels.
    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                e.get_mut().add_assign_ref(&c);
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add_term_ref(&mut self, m: &Monomial, c: &C) {
        if c.is_zero() {
            return;
        }
        if let Some(existing) = self.terms.get_mut(m) {
            existing.add_assign_ref(c);
            if existing.is_zero() {
                self.terms.remove(m);
            }
        } else {
            self.terms.insert(m.clone(), c.clone());
        }
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, C)> {
        self.terms.into_iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn colors_used(&self) -> usize {
        self.terms.keys().map(Monomial::colors_used).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::unit())
    }

    /// Smallest coefficient valuation; `EXACT` for the zero polynomial.
    pub fn valuation(&self) -> usize {
        self.terms.values().map(Coeff::valuation).min().unwrap_or(EXACT)
    }

    pub fn add_scaled(&mut self, other: &Self, s: &C) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.mul_ref(s));
        }
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term_ref(m, c);
        }
    }

    pub fn sub_assign_ref(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c.mul_ref(s))))
    }

    pub fn scale_base(&self, s: &C::Base) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c.scale(s))))
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c.truncate(order))))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.concat(mb), ca.mul_ref(cb));
            }
        }
        out
    }

    /// Left multiplication by a word.
    pub fn left_mul_word(&self, w: &[u8]) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (Monomial::concat3(w, m.letters(), &[]), c.clone())),
        )
    }

    /// Right multiplication by a word.
    pub fn right_mul_word(&self, w: &[u8]) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (Monomial::concat3(m.letters(), w, &[]), c.clone())),
        )
    }

    /// `P*`: reverses words and conjugates coefficients.
    pub fn involution(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.reversed(), c.conj())))
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.involution() == *self
    }

    /// `∂_i P = Σ_{P = R X_i S} R ⊗ S`.
    pub fn partial(&self, i: Color) -> TensorPolynomial<C> {
        let mut out = TensorPolynomial::zero();
        for (m, c) in &self.terms {
            for (r, s) in m.splits(i) {
                out.add_term(Monomial::from_indices(r), Monomial::from_indices(s), c.clone());
            }
        }
        out
    }

    /// `D_i P = Σ_{P = R X_i S} S R`.
    pub fn cyclic_derivative(&self, i: Color) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (r, s) in m.splits(i) {
                out.add_term(Monomial::concat3(s, r, &[]), c.clone());
            }
        }
        out
    }

    /// Cyclic gradient `(D_1 P, ..., D_m P)`.
    pub fn cyclic_gradient(&self, m: usize) -> Vec<Self> {
        Color::all(m).map(|i| self.cyclic_derivative(i)).collect()
    }

    /// `∂_i² P = 2 Σ_{P = R X_i S X_i Q} R ⊗ S ⊗ Q`.
    pub fn partial2(&self, i: Color) -> TripleTensorPolynomial<C> {
        let two = C::Base::from_i64(2);
        let mut out = TripleTensorPolynomial::zero();
        for (m, c) in &self.terms {
            let l = m.letters();
            let c2 = c.scale(&two);
            for a in 0..l.len() {
                if l[a] as usize != i.index() {
                    continue;
                }
                for b in a + 1..l.len() {
                    if l[b] as usize != i.index() {
                        continue;
                    }
                    out.add_term(
                        Monomial::from_indices(&l[..a]),
                        Monomial::from_indices(&l[a + 1..b]),
                        Monomial::from_indices(&l[b + 1..]),
                        c2.clone(),
                    );
                }
            }
        }
        out
    }

    /// `Σ`: divides each monomial of degree `d ≥ 1` by `d`, kills constants.
    pub fn sigma(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| !m.is_unit())
                .map(|(m, c)| (m.clone(), c.scale(&C::Base::from_ratio(1, m.degree() as i64)))),
        )
    }

    /// `Σ⁻¹`: multiplies each monomial by its degree (constants go to zero).
    pub fn sigma_inv(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| !m.is_unit())
                .map(|(m, c)| (m.clone(), c.scale(&C::Base::from_i64(m.degree() as i64)))),
        )
    }

    /// `Π(P) = P − P(0)`.
    pub fn pi(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&Monomial::unit());
        out
    }

    /// Keeps only the monomials of the given degree.
    pub fn homogeneous_part(&self, d: usize) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }
}

impl<S: Scalar> Polynomial<S> {
    /// `‖P‖_A = Σ_{deg q ≥ 1} |λ_q(P)| A^{deg q}`, defined for `A > 1`.
    pub fn norm_a(&self, a: f64) -> Result<f64, NcError> {
        if !(a > 1.0) {
            return Err(NcError::NormBase(a));
        }
        Ok(self
            .terms
            .iter()
            .filter(|(m, _)| !m.is_unit())
            .map(|(m, c)| c.abs_f64() * a.powi(m.degree() as i32))
            .sum())
    }
}

impl<C: Coeff> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if m.is_unit() {
                write!(f, "({c})")?;
            } else if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "({c})*{m}")?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<C: Coeff> Add for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl<C: Coeff> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl<C: Coeff> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        self.mul_ref(rhs)
    }
}

impl<C: Coeff> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())))
    }
}

impl<C: Coeff> Add for Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(mut self, rhs: Self) -> Polynomial<C> {
        self.add_assign_ref(&rhs);
        self
    }
}

impl<C: Coeff> Sub for Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(mut self, rhs: Self) -> Polynomial<C> {
        self.sub_assign_ref(&rhs);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRational;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    type P = Polynomial<GaussRational>;

    fn q(n: i64, d: i64) -> GaussRational {
        GaussRational::from_ratio(n, d)
    }

    fn w(s: &[u8]) -> Monomial {
        Monomial::from_indices(s)
    }

    fn x(i: usize) -> Color {
        Color::from_index(i)
    }

    #[test]
    fn involution_conjugates_and_reverses() {
        let c = GaussRational::new(BigRational::from_integer(2.into()), BigRational::one());
        let p = P::monomial(w(&[0, 1]), c.clone());
        let expect = P::monomial(w(&[1, 0]), c.conj());
        assert_eq!(p.involution(), expect);
        assert_eq!(P::one().involution(), P::one());
        let sym = &P::word(w(&[0, 1])) + &P::word(w(&[1, 0]));
        assert!(sym.is_self_adjoint());
    }

    #[test]
    fn partial_examples() {
        let d = P::word(w(&[0, 1, 0])).partial(x(0));
        let mut expect = TensorPolynomial::zero();
        expect.add_term(w(&[]), w(&[1, 0]), q(1, 1));
        expect.add_term(w(&[0, 1]), w(&[]), q(1, 1));
        assert_eq!(d, expect);
        assert!(P::var(x(1)).partial(x(0)).is_zero());
    }

    #[test]
    fn cyclic_derivative_examples() {
        assert_eq!(P::word(w(&[0, 1, 2])).cyclic_derivative(x(0)), P::word(w(&[1, 2])));
        assert_eq!(
            P::word(w(&[0; 5])).cyclic_derivative(x(0)),
            P::monomial(w(&[0; 4]), q(5, 1))
        );
        assert!(P::word(w(&[1, 2])).cyclic_derivative(x(0)).is_zero());
    }

    #[test]
    fn partial2_examples() {
        let t = P::word(w(&[0, 0])).partial2(x(0));
        let mut expect = TripleTensorPolynomial::zero();
        expect.add_term(w(&[]), w(&[]), w(&[]), q(2, 1));
        assert_eq!(t, expect);
        let t = P::word(w(&[0, 1, 0])).partial2(x(0));
        let mut expect = TripleTensorPolynomial::zero();
        expect.add_term(w(&[]), w(&[1]), w(&[]), q(2, 1));
        assert_eq!(t, expect);
        assert!(P::var(x(0)).partial2(x(0)).is_zero());
    }

    #[test]
    fn sigma_pi_examples() {
        assert_eq!(P::word(w(&[0, 1])).sigma(), P::monomial(w(&[0, 1]), q(1, 2)));
        assert!(P::one().sigma().is_zero());
        let p = &P::var(x(0)) + &P::word(w(&[0, 0]));
        assert_eq!(p.sigma(), &P::var(x(0)) + &P::monomial(w(&[0, 0]), q(1, 2)));
        let p = &P::constant(q(3, 1)) + &P::var(x(0));
        assert_eq!(p.pi(), P::var(x(0)));
        assert!(P::constant(q(5, 1)).pi().is_zero());
        assert_eq!(p.pi().pi(), p.pi());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(P::var(x(0)).norm_a(2.0).unwrap(), 2.0);
        assert_eq!(P::one().norm_a(2.0).unwrap(), 0.0);
        let p = &P::monomial(w(&[0, 0]), q(2, 1)) - &P::var(x(1));
        assert_eq!(p.norm_a(2.0).unwrap(), 10.0);
        assert!(matches!(p.norm_a(1.0), Err(NcError::NormBase(_))));
    }

    #[test]
    fn no_stored_zero_coefficients() {
        let mut p = P::word(w(&[0]));
        p.add_term(w(&[0]), q(-1, 1));
        assert!(p.is_zero());
        assert!(p.coeff(&w(&[0])).is_zero());
    }
}
