//! Master operators `Ξ`, `Ξ̄`, `Hess V`, the covariance `σ²` of the Gaussian
//! fluctuations and the linear form `φ` of the `1/N` correction.

mod vector;

pub use vector::VectorPolynomial;

use std::collections::HashMap;
use std::sync::Mutex;

use crate::ncpoly::{Color, Monomial, Polynomial, Potential, TensorPolynomial};
use crate::scalar::{Coeff, Scalar, EXACT};
use crate::sdsolve::{Moments, NumericState, SeriesState, SolveError};
use crate::series::Series;

/// `(V, μ)` and the truncation order on which all operators depend.
pub struct OperatorContext<'a, C: Coeff, M: Moments<C>> {
    mu: &'a M,
    colors: usize,
    order: usize,
    /// `D_k V`.
    dv: Vec<Polynomial<C>>,
    /// `∂_i D_l V`, indexed `[l][i]`.
    hess: Vec<Vec<TensorPolynomial<C>>>,
    gradients: Mutex<HashMap<Monomial, VectorPolynomial<C>>>,
    pairs: Mutex<HashMap<(Monomial, Monomial), C>>,
    xi1_flipped: bool,
}

impl<'a, S: Scalar> OperatorContext<'a, Series<S>, SeriesState<S>> {
    /// Series mode: couplings stay formal, everything is truncated at the
    /// order of `mu`.
    pub fn series(v: &Potential<S>, mu: &'a SeriesState<S>) -> Self {
        let m = mu.colors().max(v.colors());
        let dv = v.clone().with_colors(m).series_gradient();
        Self::new(mu, dv, mu.order())
    }
}

impl<'a> OperatorContext<'a, crate::Complex64, NumericState> {
    /// Numeric mode: couplings substituted. `Ξ⁻¹`, `σ²` and `φ` need formal
    /// series and are unavailable here.
    pub fn numeric(v: &Potential<crate::Complex64>, mu: &'a NumericState) -> Result<Self, SolveError> {
        let m = mu.colors().max(v.colors());
        let dv = v.clone().with_colors(m).numeric_gradient()?;
        Ok(Self::new(mu, dv, EXACT))
    }
}

impl<'a, C: Coeff, M: Moments<C>> OperatorContext<'a, C, M> {
    pub fn new(mu: &'a M, dv: Vec<Polynomial<C>>, order: usize) -> Self {
        let colors = dv.len();
        let hess = dv
            .iter()
            .map(|d| Color::all(colors).map(|i| d.partial(i)).collect())
            .collect();
        OperatorContext {
            mu,
            colors,
            order,
            dv,
            hess,
            gradients: Mutex::new(HashMap::new()),
            pairs: Mutex::new(HashMap::new()),
            xi1_flipped: false,
        }
    }

    /// Negates `Ξ₁` from now on: a deliberate fault for mutation checks.
    pub fn inject_xi1_sign_flip(&mut self) {
        self.xi1_flipped = true;
        self.gradients.lock().unwrap().clear();
        self.pairs.lock().unwrap().clear();
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mu(&self) -> &M {
        self.mu
    }

    pub fn cyclic_gradient(&self, p: &Polynomial<C>) -> VectorPolynomial<C> {
        VectorPolynomial::new(p.cyclic_gradient(self.colors))
    }

    /// `Ξ₁P = Π(Σ_k ∂_k ΣP ♯ D_k V)`.
    pub fn xi1(&self, p: &Polynomial<C>) -> Polynomial<C> {
        let sp = p.sigma();
        let mut out = Polynomial::zero();
        for (k, dv) in self.dv.iter().enumerate() {
            out.add_assign_ref(&sp.partial(Color::from_index(k)).sharp(dv));
        }
        let out = out.pi().truncate(self.order);
        if self.xi1_flipped {
            let mut neg = Polynomial::zero();
            neg.sub_assign_ref(&out);
            return neg;
        }
        out
    }

    /// `Ξ₂P = Π(Σ_k (μ⊗I + I⊗μ) ∂_k D_k ΣP)`.
    pub fn xi2(&self, p: &Polynomial<C>) -> Result<Polynomial<C>, SolveError> {
        let sp = p.sigma();
        let mut out = Polynomial::zero();
        for k in Color::all(self.colors) {
            let t = sp.cyclic_derivative(k).partial(k);
            out.add_assign_ref(&self.mu.contract_both(&t, self.order)?);
        }
        Ok(out.pi().truncate(self.order))
    }

    /// `Ξ₀ = I − Ξ₂` on constant-free polynomials (the input is projected by `Π`).
    pub fn xi0(&self, p: &Polynomial<C>) -> Result<Polynomial<C>, SolveError> {
        let mut out = p.pi();
        out.sub_assign_ref(&self.xi2(p)?);
        Ok(out.truncate(self.order))
    }

    /// `Ξ = Ξ₀ + Ξ₁`.
    pub fn xi(&self, p: &Polynomial<C>) -> Result<Polynomial<C>, SolveError> {
        let mut out = self.xi0(p)?;
        out.add_assign_ref(&self.xi1(p));
        Ok(out.truncate(self.order))
    }

    /// `Ξ₀⁻¹ = Σ_n Ξ₂ⁿ`; finite since `Ξ₂` lowers the degree by at least two.
    pub fn xi0_inverse(&self, p: &Polynomial<C>) -> Result<Polynomial<C>, SolveError> {
        let mut term = p.pi().truncate(self.order);
        let mut out = term.clone();
        while !term.is_zero() {
            term = self.xi2(&term)?;
            out.add_assign_ref(&term);
        }
        Ok(out)
    }

    /// `Ξ⁻¹ = Σ_n (−Ξ₀⁻¹Ξ₁)ⁿ Ξ₀⁻¹`, exact to coupling order `K`: each `Ξ₁`
    /// raises the order by at least one.
    pub fn xi_inverse(&self, p: &Polynomial<C>) -> Result<Polynomial<C>, SolveError> {
        if self.order == EXACT {
            return Err(SolveError::SeriesOnly("Ξ⁻¹"));
        }
        let mut term = self.xi0_inverse(p)?;
        let mut out = term.clone();
        for _ in 0..self.order {
            term = self.xi0_inverse(&self.xi1(&term))?.scale_base(&C::Base::from_i64(-1));
            if term.is_zero() {
                break;
            }
            out.add_assign_ref(&term);
        }
        Ok(out.truncate(self.order))
    }

    /// `Ξ̄₁P = Σ_k ∂_k P ♯ D_k V`.
    pub fn xibar1(&self, p: &Polynomial<C>) -> Polynomial<C> {
        let mut out = Polynomial::zero();
        for (k, dv) in self.dv.iter().enumerate() {
            out.add_assign_ref(&p.partial(Color::from_index(k)).sharp(dv));
        }
        out.truncate(self.order)
    }

    /// `Ξ̄₂P = Σ_i (I⊗μ) M ∂_i² P` with `M(A⊗B⊗C) = AC⊗B`.
    pub fn xibar2(&self, p: &Polynomial<C>) -> Result<Polynomial<C>, SolveError> {
        let mut out = Polynomial::zero();
        for i in Color::all(self.colors) {
            out.add_assign_ref(&self.mu.contract_right(&p.partial2(i).merge_outer(), self.order)?);
        }
        Ok(out.truncate(self.order))
    }

    /// `Ξ̄ = Σ⁻¹ − Ξ̄₂ + Ξ̄₁` on `ΠP`; constants are sent to zero.
    pub fn xibar(&self, p: &Polynomial<C>) -> Result<Polynomial<C>, SolveError> {
        let p = p.pi();
        let mut out = p.sigma_inv();
        out.sub_assign_ref(&self.xibar2(&p)?);
        out.add_assign_ref(&self.xibar1(&p));
        Ok(out.truncate(self.order))
    }

    /// Componentwise `Ξ̄`.
    pub fn xibar_vec(&self, v: &VectorPolynomial<C>) -> Result<VectorPolynomial<C>, SolveError> {
        v.components()
            .iter()
            .map(|p| self.xibar(p))
            .collect::<Result<_, _>>()
            .map(VectorPolynomial::new)
    }

    /// `Hess(V)(v)_l = Σ_i ∂_i D_l V ♯ v_i`.
    pub fn hess_apply(&self, v: &VectorPolynomial<C>) -> VectorPolynomial<C> {
        let comps = (0..self.colors)
            .map(|l| {
                let mut out = Polynomial::zero();
                for (i, vi) in v.components().iter().enumerate().take(self.colors) {
                    out.add_assign_ref(&self.hess[l][i].sharp(vi));
                }
                out.truncate(self.order)
            })
            .collect();
        VectorPolynomial::new(comps)
    }

    /// `C(P, Q) = Σ_{k,l} μ⊗μ[∂_k P_l × ∂_l Q_k] + Σ_l μ(Q_l · Hess(V)(P)_l) + Σ_k μ(P_k Q_k)`.
    pub fn covariance_c(&self, p: &VectorPolynomial<C>, q: &VectorPolynomial<C>) -> Result<C, SolveError> {
        let k_ord = self.order;
        let mut acc = C::zero();
        let dp: Vec<Vec<TensorPolynomial<C>>> = p
            .components()
            .iter()
            .map(|pl| Color::all(self.colors).map(|k| pl.partial(k)).collect())
            .collect();
        let dq: Vec<Vec<TensorPolynomial<C>>> = q
            .components()
            .iter()
            .map(|ql| Color::all(self.colors).map(|k| ql.partial(k)).collect())
            .collect();
        for k in 0..self.colors {
            for l in 0..self.colors {
                acc.add_assign_ref(&self.pair_expect_tensor(&dp[l][k], &dq[k][l])?);
            }
        }
        let hp = self.hess_apply(p);
        for l in 0..self.colors {
            acc.add_assign_ref(&self.pair_expect(&q.components()[l], &hp.components()[l])?);
            acc.add_assign_ref(&self.pair_expect(&p.components()[l], &q.components()[l])?);
        }
        Ok(acc.truncate(k_ord))
    }

    fn budget(&self, a: &C, b: &C) -> Option<usize> {
        let v = a.valuation().saturating_add(b.valuation());
        (v <= self.order).then(|| self.order - v)
    }

    /// `μ(A·B)` without expanding the product.
    fn pair_expect(&self, a: &Polynomial<C>, b: &Polynomial<C>) -> Result<C, SolveError> {
        let mut acc = C::zero();
        for (wa, ca) in a.terms() {
            for (wb, cb) in b.terms() {
                let Some(p) = self.budget(ca, cb) else { continue };
                let m = self.mu.moment(&wa.concat(wb), p)?;
                if !m.is_zero() {
                    acc.add_assign_ref(&ca.mul_ref(cb).mul_ref(&m).truncate(self.order));
                }
            }
        }
        Ok(acc)
    }

    /// `μ⊗μ(S × T)` with `(A⊗B) × (C⊗D) = AC ⊗ BD`, without expanding.
    fn pair_expect_tensor(&self, s: &TensorPolynomial<C>, t: &TensorPolynomial<C>) -> Result<C, SolveError> {
        let mut acc = C::zero();
        for (a, b, cs) in s.terms() {
            for (c, d, ct) in t.terms() {
                let Some(p) = self.budget(cs, ct) else { continue };
                let left = self.mu.moment(&a.concat(c), p)?;
                if left.is_zero() {
                    continue;
                }
                let right = self.mu.moment(&b.concat(d), p)?;
                if !right.is_zero() {
                    acc.add_assign_ref(&cs.mul_ref(ct).mul_ref(&left.mul_ref(&right)).truncate(self.order));
                }
            }
        }
        Ok(acc)
    }

    /// `DΣΞ⁻¹Π(w)` for a single word, memoised.
    fn gradient_of_word(&self, w: &Monomial) -> Result<VectorPolynomial<C>, SolveError> {
        if let Some(v) = self.gradients.lock().unwrap().get(w) {
            return Ok(v.clone());
        }
        let inv = self.xi_inverse(&Polynomial::word(w.clone()))?;
        let v = self.cyclic_gradient(&inv.sigma()).truncate(self.order);
        self.gradients.lock().unwrap().insert(w.clone(), v.clone());
        Ok(v)
    }

    /// `DΣΞ⁻¹Π(P)`.
    pub fn transported_gradient(&self, p: &Polynomial<C>) -> Result<VectorPolynomial<C>, SolveError> {
        let mut out = VectorPolynomial::zero(self.colors);
        for (w, c) in p.pi().terms() {
            out.add_scaled(&self.gradient_of_word(w)?, c);
        }
        Ok(out.truncate(self.order))
    }

    fn sigma2_words(&self, a: &Monomial, b: &Monomial) -> Result<C, SolveError> {
        if a.is_unit() || b.is_unit() {
            return Ok(C::zero());
        }
        let (a, b) = (a.cyclic_canonical(), b.cyclic_canonical());
        let key = if a <= b { (a, b) } else { (b, a) };
        if let Some(v) = self.pairs.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = self.covariance_c(&self.gradient_of_word(&key.0)?, &self.gradient_of_word(&key.1)?)?;
        self.pairs.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    /// `σ²(P, Q) = C(DΣΞ⁻¹ΠP, DΣΞ⁻¹ΠQ)`, bilinear in `P` and `Q`.
    pub fn sigma2(&self, p: &Polynomial<C>, q: &Polynomial<C>) -> Result<C, SolveError> {
        let mut acc = C::zero();
        for (a, ca) in p.pi().terms() {
            for (b, cb) in q.pi().terms() {
                let s = self.sigma2_words(a, b)?;
                if !s.is_zero() {
                    acc.add_assign_ref(&ca.mul_ref(cb).mul_ref(&s).truncate(self.order));
                }
            }
        }
        Ok(acc.truncate(self.order))
    }

    /// `σ²` extended linearly to tensors, `σ²(A ⊗ B) = σ²(A, B)`.
    pub fn sigma2_tensor(&self, t: &TensorPolynomial<C>) -> Result<C, SolveError> {
        let mut acc = C::zero();
        for (a, b, c) in t.terms() {
            let s = self.sigma2_words(a, b)?;
            if !s.is_zero() {
                acc.add_assign_ref(&c.mul_ref(&s).truncate(self.order));
            }
        }
        Ok(acc.truncate(self.order))
    }

    /// `φ₀(P) = Σ_i σ²(∂_i D_i P)`.
    pub fn phi0(&self, p: &Polynomial<C>) -> Result<C, SolveError> {
        let mut acc = C::zero();
        for i in Color::all(self.colors) {
            acc.add_assign_ref(&self.sigma2_tensor(&p.cyclic_derivative(i).partial(i))?);
        }
        Ok(acc)
    }

    /// `φ = φ₀ ∘ Σ`.
    pub fn phi(&self, p: &Polynomial<C>) -> Result<C, SolveError> {
        self.phi0(&p.sigma())
    }

    /// `φ(Ξ⁻¹ΠP)`, the limit of `N(E[μ̂_N(P)] − μ(P))`.
    pub fn second_order_correction(&self, p: &Polynomial<C>) -> Result<C, SolveError> {
        self.phi(&self.xi_inverse(&p.pi())?)
    }
}

#[cfg(test)]
mod tests;
