//! Truncated power series in the couplings `t_1..t_n`.
//!
//! A series carries its precision: every coefficient of total order at most
//! `precision` is exact, higher orders are unknown. Products keep
//! `min(val(a) + prec(b), val(b) + prec(a))`, sums keep the smaller precision.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::scalar::{Coeff, Scalar, EXACT};

/// Largest number of distinct couplings a series can track.
pub const MAX_COUPLINGS: usize = 8;

/// Exponent vector of a coupling monomial, ordered by total degree first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex {
    total: u16,
    exps: [u8; MAX_COUPLINGS],
}

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(var: usize) -> Self {
        let mut m = Self::default();
        m.exps[var] = 1;
        m.total = 1;
        m
    }

    pub fn from_exponents(exps: &[u8]) -> Self {
        assert!(exps.len() <= MAX_COUPLINGS, "too many couplings");
        let mut m = Self::default();
        m.exps[..exps.len()].copy_from_slice(exps);
        m.total = exps.iter().map(|&e| e as u16).sum();
        m
    }

    pub fn total(&self) -> usize {
        self.total as usize
    }

    pub fn exponent(&self, var: usize) -> u8 {
        self.exps[var]
    }

    pub fn exponents(&self) -> &[u8; MAX_COUPLINGS] {
        &self.exps
    }

    /// Exponents up to the last nonzero entry or `len`, whichever is longer.
    pub fn to_vec(&self, len: usize) -> Vec<u8> {
        let last = self.exps.iter().rposition(|&e| e != 0).map_or(0, |p| p + 1);
        self.exps[..last.max(len)].to_vec()
    }

    pub fn combine(&self, other: &Self) -> Self {
        let mut m = *self;
        for (a, b) in m.exps.iter_mut().zip(other.exps.iter()) {
            *a += *b;
        }
        m.total += other.total;
        m
    }
}

/// A truncated multivariate series with coefficients in a base scalar.
#[derive(Clone, Debug)]
pub struct Series<S> {
    terms: BTreeMap<MultiIndex, S>,
    precision: usize,
}

impl<S: Scalar> Series<S> {
    /// The zero series known up to (and including) total order `precision`.
    pub fn zero_to(precision: usize) -> Self {
        Series {
            terms: BTreeMap::new(),
            precision,
        }
    }

    pub fn constant(c: S) -> Self {
        let mut s = Self::zero_to(EXACT);
        s.add_term(MultiIndex::zero(), c);
        s
    }

    /// The coupling `t_var` itself.
    pub fn var(var: usize) -> Self {
        Self::monomial(MultiIndex::unit(var), S::one())
    }

    pub fn monomial(idx: MultiIndex, c: S) -> Self {
        let mut s = Self::zero_to(EXACT);
        s.add_term(idx, c);
        s
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, S)>>(terms: I, precision: usize) -> Self {
        let mut s = Self::zero_to(precision);
        for (idx, c) in terms {
            s.add_term(idx, c);
        }
        s
    }

    pub fn add_term(&mut self, idx: MultiIndex, c: S) {
        if idx.total() > self.precision || c.is_zero() {
            return;
        }
        match self.terms.entry(idx) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().add_assign_ref(&c);
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn coefficient(&self, idx: &MultiIndex) -> S {
        self.terms.get(idx).cloned().unwrap_or_else(S::zero)
    }

    /// Coefficient of `t^exps`, with exponents listed per coupling.
    pub fn coeff(&self, exps: &[u8]) -> S {
        self.coefficient(&MultiIndex::from_exponents(exps))
    }

    pub fn constant_term(&self) -> S {
        self.coefficient(&MultiIndex::zero())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of the coefficients of total order `n`, as a series in one variable.
    pub fn graded_part(&self, n: usize) -> Self {
        Series::from_terms(
            self.terms
                .iter()
                .filter(|(i, _)| i.total() == n)
                .map(|(i, c)| (*i, c.clone())),
            EXACT,
        )
    }

    pub fn eval(&self, values: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(idx, c)| {
                let mut term = c.to_c64();
                for (v, &e) in idx.exponents().iter().enumerate() {
                    if e > 0 {
                        term *= values.get(v).copied().unwrap_or_default().powi(e as i32);
                    }
                }
                term
            })
            .sum()
    }

    /// Partial derivative with respect to `t_var`.
    pub fn derivative(&self, var: usize) -> Self {
        let precision = if self.precision == EXACT {
            EXACT
        } else {
            self.precision.saturating_sub(1)
        };
        let mut out = Series::zero_to(precision);
        for (idx, c) in &self.terms {
            let e = idx.exponent(var);
            if e == 0 {
                continue;
            }
            let mut lowered = *idx;
            lowered.exps[var] -= 1;
            lowered.total -= 1;
            out.add_term(lowered, c.scale(&S::from_i64(e as i64)));
        }
        out
    }

    /// `∫_0^1 f(s t) ds / s`: divides the order-`n` part by `n`.
    /// The constant term must vanish.
    pub fn radial_integral(&self) -> Self {
        let mut out = Series::zero_to(self.precision);
        for (idx, c) in &self.terms {
            assert!(idx.total() > 0, "radial integral of a series with a constant term");
            out.add_term(*idx, c.scale(&S::from_ratio(1, idx.total() as i64)));
        }
        out
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Series<T> {
        Series::from_terms(self.terms.iter().map(|(i, c)| (*i, f(c))), self.precision)
    }

    pub fn max_order(&self) -> usize {
        self.terms.keys().map(|i| i.total()).max().unwrap_or(0)
    }

    fn format_with(&self, names: &dyn Fn(usize) -> String) -> String {
        let mut out = String::new();
        for (idx, c) in &self.terms {
            let mono: Vec<String> = (0..MAX_COUPLINGS)
                .filter(|&v| idx.exponent(v) > 0)
                .map(|v| match idx.exponent(v) {
                    1 => names(v),
                    e => format!("{}^{}", names(v), e),
                })
                .collect();
            let cs = c.to_string();
            let piece = match (mono.is_empty(), cs.as_str()) {
                (true, _) => format!("({cs})"),
                (false, "1") => mono.join("*"),
                (false, _) => format!("({cs})*{}", mono.join("*")),
            };
            if !out.is_empty() {
                out.push_str(" + ");
            }
            out.push_str(&piece);
        }
        if out.is_empty() {
            out.push('0');
        }
        if self.precision != EXACT {
            out.push_str(&format!(" + O(t^{})", self.precision + 1));
        }
        out
    }

    /// Rendering with caller-supplied coupling names.
    pub fn display_with(&self, names: &[String]) -> String {
        self.format_with(&|v| names.get(v).cloned().unwrap_or_else(|| format!("t{}", v + 1)))
    }
}

impl<S: Scalar> fmt::Display for Series<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_with(&|v| format!("t{}", v + 1)))
    }
}

impl<S: Scalar> PartialEq for Series<S> {
    /// Equality of the coefficients both sides know.
    fn eq(&self, other: &Self) -> bool {
        let p = self.precision.min(other.precision);
        let a = self.terms.iter().filter(|(i, _)| i.total() <= p);
        let b = other.terms.iter().filter(|(i, _)| i.total() <= p);
        a.eq(b)
    }
}

impl<S: Scalar> Add for Series<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_ref(&rhs)
    }
}

impl<S: Scalar> Sub for Series<S> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.sub_assign_ref(&rhs);
        self
    }
}

impl<S: Scalar> Mul for Series<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl<S: Scalar> Neg for Series<S> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl<S: Scalar> Zero for Series<S> {
    fn zero() -> Self {
        Series::zero_to(EXACT)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<S: Scalar> One for Series<S> {
    fn one() -> Self {
        Series::constant(S::one())
    }
}

impl<S: Scalar> Coeff for Series<S> {
    type Base = S;

    fn from_base(b: S) -> Self {
        Series::constant(b)
    }

    fn conj(&self) -> Self {
        Series {
            terms: self.terms.iter().map(|(i, c)| (*i, c.conj())).collect(),
            precision: self.precision,
        }
    }

    fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Series::zero_to(self.precision);
        }
        Series {
            terms: self.terms.iter().map(|(i, c)| (*i, c.mul_ref(s))).collect(),
            precision: self.precision,
        }
    }

    fn valuation(&self) -> usize {
        let lowest = self.terms.keys().next().map_or(EXACT, |i| i.total());
        lowest.min(self.precision.saturating_add(1))
    }

    fn precision(&self) -> usize {
        self.precision
    }

    fn truncate(&self, order: usize) -> Self {
        if order >= self.precision && self.max_order() <= order {
            return self.clone();
        }
        Series {
            terms: self
                .terms
                .iter()
                .filter(|(i, _)| i.total() <= order)
                .map(|(i, c)| (*i, c.clone()))
                .collect(),
            precision: self.precision.min(order),
        }
    }

    fn add_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_ref(other);
        out
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let precision = self
            .valuation()
            .saturating_add(other.precision)
            .min(other.valuation().saturating_add(self.precision));
        let mut out = Series::zero_to(precision);
        for (ia, ca) in &self.terms {
            if ia.total() > precision {
                break;
            }
            for (ib, cb) in &other.terms {
                if ia.total() + ib.total() > precision {
                    break;
                }
                out.add_term(ia.combine(ib), ca.mul_ref(cb));
            }
        }
        out
    }

    fn add_assign_ref(&mut self, other: &Self) {
        if other.precision < self.precision {
            self.precision = other.precision;
            let p = self.precision;
            self.terms.retain(|i, _| i.total() <= p);
        }
        for (i, c) in &other.terms {
            self.add_term(*i, c.clone());
        }
    }

    fn sub_assign_ref(&mut self, other: &Self) {
        if other.precision < self.precision {
            self.precision = other.precision;
            let p = self.precision;
            self.terms.retain(|i, _| i.total() <= p);
        }
        for (i, c) in &other.terms {
            self.add_term(*i, -c.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRational;

    type S = Series<GaussRational>;

    fn q(n: i64) -> GaussRational {
        GaussRational::from_i64(n)
    }

    #[test]
    fn product_precision_tracks_valuations() {
        let t = S::var(0);
        let a = S::from_terms([(MultiIndex::zero(), q(1)), (MultiIndex::unit(0), q(2))], 3);
        let b = t.mul_ref(&a);
        assert_eq!(b.precision(), 4);
        let c = a.mul_ref(&a);
        assert_eq!(c.precision(), 3);
        assert_eq!(c.coeff(&[2]), q(4));
        let zero_tail = S::zero_to(2);
        assert_eq!(zero_tail.valuation(), 3);
        assert_eq!(zero_tail.mul_ref(&a).precision(), 2);
    }

    #[test]
    fn sums_keep_smaller_precision() {
        let a = S::from_terms(
            [(MultiIndex::unit(0), q(1)), (MultiIndex::from_exponents(&[3]), q(5))],
            4,
        );
        let b = S::zero_to(2);
        let s = a.add_ref(&b);
        assert_eq!(s.precision(), 2);
        assert_eq!(s.coeff(&[3]), q(0));
    }

    #[test]
    fn derivative_and_radial_integral() {
        let s = S::from_terms(
            [
                (MultiIndex::from_exponents(&[1, 0]), q(2)),
                (MultiIndex::from_exponents(&[2, 1]), q(6)),
            ],
            EXACT,
        );
        let d = s.derivative(0);
        assert_eq!(d.coeff(&[0]), q(2));
        assert_eq!(d.coeff(&[1, 1]), q(12));
        let r = s.radial_integral();
        assert_eq!(r.coeff(&[1]), q(2));
        assert_eq!(r.coeff(&[2, 1]), q(2));
    }

    #[test]
    fn eval_matches_hand_sum() {
        let s = S::from_terms(
            [(MultiIndex::zero(), q(1)), (MultiIndex::from_exponents(&[1, 1]), q(3))],
            EXACT,
        );
        let v = s.eval(&[Complex64::new(0.5, 0.0), Complex64::new(2.0, 0.0)]);
        assert!((v.re - 4.0).abs() < 1e-15);
    }

    #[test]
    fn display_shows_truncation() {
        let s = S::from_terms([(MultiIndex::zero(), q(1)), (MultiIndex::unit(0), q(-8))], 1);
        assert_eq!(s.to_string(), "(1) + (-8)*t1 + O(t^2)");
    }
}
