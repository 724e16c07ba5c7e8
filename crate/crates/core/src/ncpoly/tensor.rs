use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::Coeff;

use super::{Monomial, Polynomial};

/// An element of the algebraic tensor square, `Σ c · A ⊗ B`.
#[derive(Clone, PartialEq)]
pub struct TensorPolynomial<C> {
    terms: BTreeMap<(Monomial, Monomial), C>,
}

impl<C: Coeff> TensorPolynomial<C> {
    pub fn zero() -> Self {
        TensorPolynomial { terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, a: Monomial, b: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((a, b)) {
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

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Monomial, &C)> {
        self.terms.iter().map(|((a, b), c)| (a, b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        for ((a, b), c) in &other.terms {
            self.add_term(a.clone(), b.clone(), c.clone());
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.terms {
            out.add_term(a.clone(), b.clone(), c.mul_ref(s));
        }
        out
    }

    /// `(A ⊗ B)♯R = A R B`, extended bilinearly.
    pub fn sharp(&self, r: &Polynomial<C>) -> Polynomial<C> {
        let mut out = Polynomial::zero();
        for ((a, b), c) in &self.terms {
            for (m, cr) in r.terms() {
                out.add_term(Monomial::concat3(a.letters(), m.letters(), b.letters()), c.mul_ref(cr));
            }
        }
        out
    }

    /// Swaps the legs: `(A ⊗ B)^t = B ⊗ A`.
    pub fn transpose(&self) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.terms {
            out.add_term(b.clone(), a.clone(), c.clone());
        }
        out
    }

    /// `A ⊗ B ↦ B A`.
    pub fn flip_multiply(&self) -> Polynomial<C> {
        let mut out = Polynomial::zero();
        for ((a, b), c) in &self.terms {
            out.add_term(b.concat(a), c.clone());
        }
        out
    }

    /// Product in the tensor algebra: `(A ⊗ B)(C ⊗ D) = AC ⊗ BD`.
    pub fn mul_ref(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                out.add_term(a.concat(a2), b.concat(b2), c.mul_ref(c2));
            }
        }
        out
    }

    /// `P ⊗ Q` for polynomials.
    pub fn outer(p: &Polynomial<C>, q: &Polynomial<C>) -> Self {
        let mut out = Self::zero();
        for (a, ca) in p.terms() {
            for (b, cb) in q.terms() {
                out.add_term(a.clone(), b.clone(), ca.mul_ref(cb));
            }
        }
        out
    }
}

impl<C: Coeff> fmt::Debug for TensorPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, ((a, b), c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*{a}⊗{b}")?;
        }
        Ok(())
    }
}

/// An element of the tensor cube, `Σ c · A ⊗ B ⊗ C`.
#[derive(Clone, PartialEq)]
pub struct TripleTensorPolynomial<C> {
    terms: BTreeMap<(Monomial, Monomial, Monomial), C>,
}

impl<C: Coeff> TripleTensorPolynomial<C> {
    pub fn zero() -> Self {
        TripleTensorPolynomial { terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, a: Monomial, b: Monomial, c3: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((a, b, c3)) {
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

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Monomial, &Monomial, &C)> {
        self.terms.iter().map(|((a, b, d), c)| (a, b, d, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(A ⊗ B ⊗ C)♯(S, T) = A S B T C`.
    pub fn sharp2(&self, s: &Polynomial<C>, t: &Polynomial<C>) -> Polynomial<C> {
        let mut out = Polynomial::zero();
        for ((a, b, d), c) in &self.terms {
            for (ms, cs) in s.terms() {
                let left = Monomial::concat3(a.letters(), ms.letters(), b.letters());
                let cl = c.mul_ref(cs);
                for (mt, ct) in t.terms() {
                    out.add_term(
                        Monomial::concat3(left.letters(), mt.letters(), d.letters()),
                        cl.mul_ref(ct),
                    );
                }
            }
        }
        out
    }

    /// `A ⊗ B ⊗ C ↦ AC ⊗ B`.
    pub fn merge_outer(&self) -> TensorPolynomial<C> {
        let mut out = TensorPolynomial::zero();
        for ((a, b, d), c) in &self.terms {
            out.add_term(a.concat(d), b.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> fmt::Debug for TripleTensorPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, ((a, b, d), c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*{a}⊗{b}⊗{d}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{GaussRational, Scalar};
    use num_traits::One;

    type P = Polynomial<GaussRational>;

    fn w(s: &[u8]) -> Monomial {
        Monomial::from_indices(s)
    }

    #[test]
    fn sharp_inserts_in_the_middle() {
        let mut t = TensorPolynomial::zero();
        t.add_term(w(&[0]), w(&[1]), GaussRational::one());
        assert_eq!(t.sharp(&P::word(w(&[2]))), P::word(w(&[0, 2, 1])));
        let mut id = TensorPolynomial::zero();
        id.add_term(w(&[]), w(&[]), GaussRational::one());
        let p = &P::word(w(&[0, 1])) + &P::monomial(w(&[1]), GaussRational::from_i64(3));
        assert_eq!(id.sharp(&p), p);
    }

    #[test]
    fn sharp2_inserts_twice() {
        let mut t = TripleTensorPolynomial::zero();
        t.add_term(w(&[]), w(&[1]), w(&[]), GaussRational::one());
        let x1 = P::word(w(&[0]));
        assert_eq!(t.sharp2(&x1, &x1), P::word(w(&[0, 1, 0])));
    }

    #[test]
    fn merge_and_flip() {
        let mut t = TripleTensorPolynomial::zero();
        t.add_term(w(&[0]), w(&[1]), w(&[2]), GaussRational::one());
        let m = t.merge_outer();
        let mut expect = TensorPolynomial::zero();
        expect.add_term(w(&[0, 2]), w(&[1]), GaussRational::one());
        assert_eq!(m, expect);
        assert_eq!(expect.flip_multiply(), P::word(w(&[1, 0, 2])));
        assert_eq!(expect.transpose().transpose(), expect);
    }
}
