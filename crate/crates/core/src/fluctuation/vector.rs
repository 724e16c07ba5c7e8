use std::fmt;

use crate::ncpoly::Polynomial;
use crate::scalar::Coeff;

/// An element `(P_1, ..., P_m)` of `C⟨X⟩^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPolynomial<C: Coeff> {
    components: Vec<Polynomial<C>>,
}

impl<C: Coeff> VectorPolynomial<C> {
    pub fn new(components: Vec<Polynomial<C>>) -> Self {
        VectorPolynomial { components }
    }

    pub fn zero(m: usize) -> Self {
        VectorPolynomial {
            components: vec![Polynomial::zero(); m],
        }
    }

    pub fn components(&self) -> &[Polynomial<C>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        self.add_scaled(other, &C::one());
    }

    pub fn sub_assign_ref(&mut self, other: &Self) {
        self.add_scaled(other, &-C::one());
    }

    /// `self += s · other`.
    pub fn add_scaled(&mut self, other: &Self, s: &C) {
        if self.components.len() < other.components.len() {
            self.components.resize(other.components.len(), Polynomial::zero());
        }
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.add_scaled(b, s);
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        VectorPolynomial {
            components: self.components.iter().map(|p| p.truncate(order)).collect(),
        }
    }
}

impl<C: Coeff> fmt::Display for VectorPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, p) in self.components.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}
