use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::One;

use crate::ncpoly::{Monomial, Potential};
use crate::scalar::{Coeff, Scalar};
use crate::series::Series;

use super::{canonical_words, Moments, SolveError};

/// `μ_t` as formal series in the couplings, computed on demand by double
/// induction on coupling order and word degree.
pub struct SeriesState<S: Scalar> {
    colors: usize,
    order: usize,
    /// Per colour: `(coupling, word u, weight)` with `D_i V = Σ weight·t·u`.
    gradient: Vec<Vec<(usize, Monomial, S)>>,
    memo: Mutex<HashMap<Monomial, Series<S>>>,
}

impl<S: Scalar> SeriesState<S> {
    pub fn new(v: &Potential<S>, order: usize) -> Self {
        let gradient = v
            .gradient_pieces()
            .into_iter()
            .map(|pieces| {
                pieces
                    .into_iter()
                    .flat_map(|(k, p)| p.into_terms().map(move |(u, c)| (k, u, c)))
                    .collect()
            })
            .collect();
        SeriesState {
            colors: v.colors(),
            order,
            gradient,
            memo: Mutex::new(HashMap::new()),
        }
    }

    /// Widens the colour count, for queries in letters `V` does not use.
    pub fn with_colors(mut self, m: usize) -> Self {
        if m > self.colors {
            self.gradient.resize(m, Vec::new());
            self.colors = m;
        }
        self
    }

    /// Evaluates every canonical word of degree `≤ max_degree`.
    pub fn populate(&self, max_degree: usize) -> Result<(), SolveError> {
        for w in canonical_words(self.colors, max_degree) {
            self.moment(&w, self.order)?;
        }
        Ok(())
    }

    /// Snapshot of the stored canonical words and their series.
    pub fn values(&self) -> Vec<(Monomial, Series<S>)> {
        let memo = self.memo.lock().unwrap();
        let mut v: Vec<_> = memo.iter().map(|(w, s)| (w.clone(), s.truncate(self.order))).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    fn compute(&self, w: &Monomial, k: usize) -> Series<S> {
        if w.is_unit() {
            return Series::one();
        }
        if let Some(s) = self.memo.lock().unwrap().get(w) {
            if s.precision() >= k {
                return s.truncate(k);
            }
        }
        let letters = w.letters();
        let i = letters[0];
        let rest = &letters[1..];
        let mut acc = Series::zero_to(k);
        for (j, &l) in rest.iter().enumerate() {
            if l != i {
                continue;
            }
            let a = self.get(&rest[..j], k);
            if a.is_empty() {
                continue;
            }
            let b = self.get(&rest[j + 1..], k);
            acc.add_assign_ref(&a.mul_ref(&b));
        }
        if k >= 1 {
            for (coupling, u, c) in &self.gradient[i as usize] {
                let m = self.get(&[u.letters(), rest].concat(), k - 1);
                if m.is_empty() {
                    continue;
                }
                let term = Series::var(*coupling).mul_ref(&m).scale(c);
                acc.sub_assign_ref(&term);
            }
        }
        let acc = acc.truncate(k);
        let mut memo = self.memo.lock().unwrap();
        let keep = memo.get(w).is_none_or(|s| s.precision() < k);
        if keep {
            memo.insert(w.clone(), acc.clone());
        }
        acc
    }

    fn get(&self, letters: &[u8], k: usize) -> Series<S> {
        let w = Monomial::from_indices(letters).cyclic_canonical();
        self.compute(&w, k)
    }
}

impl<S: Scalar> Moments<Series<S>> for SeriesState<S> {
    fn moment(&self, w: &Monomial, precision: usize) -> Result<Series<S>, SolveError> {
        if w.colors_used() > self.colors {
            return Err(SolveError::Input(crate::ncpoly::NcError::ColorOutOfRange {
                color: w.colors_used(),
                colors: self.colors,
            }));
        }
        Ok(self.compute(&w.cyclic_canonical(), precision.min(self.order)))
    }

    fn order(&self) -> usize {
        self.order
    }

    fn colors(&self) -> usize {
        self.colors
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::parse_potential;
    use crate::scalar::GaussRational;

    type Q = GaussRational;

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    fn word(s: &[u8]) -> Monomial {
        Monomial::from_indices(s)
    }

    #[test]
    fn gaussian_moments_are_catalan() {
        let v = Potential::<Q>::zero(1);
        let mu = SeriesState::new(&v, 0);
        for (k, cat) in [1, 2, 5, 14, 42, 132].iter().enumerate() {
            let m = mu.moment(&word(&vec![0; 2 * (k + 1)]), 0).unwrap();
            assert_eq!(m.constant_term(), q(*cat));
        }
        assert!(mu.moment(&word(&[0, 0, 0]), 0).unwrap().is_empty());
    }

    #[test]
    fn two_free_semicircles() {
        let mu = SeriesState::new(&Potential::<Q>::zero(2), 0);
        assert!(mu.moment(&word(&[0, 1, 0, 1]), 0).unwrap().is_empty());
        assert_eq!(mu.moment(&word(&[0, 1, 1, 0]), 0).unwrap().constant_term(), q(1));
    }

    #[test]
    fn quartic_second_moment() {
        let v: Potential<Q> = parse_potential("t*x1^4", 1).unwrap();
        let mu = SeriesState::new(&v, 8);
        let m2 = mu.moment(&word(&[0, 0]), 8).unwrap();
        let expect = [1, -8, 144, -3456, 96768, -2985984, 98537472, -3415965696, 122974765056];
        for (k, c) in expect.iter().enumerate() {
            assert_eq!(m2.coeff(&[k as u8]), q(*c), "order {k}");
        }
    }

    #[test]
    fn requests_clamp_to_order() {
        let v: Potential<Q> = parse_potential("t*x1^4", 1).unwrap();
        let mu = SeriesState::new(&v, 2);
        let m = mu.moment(&word(&[0, 0]), 10).unwrap();
        assert_eq!(m.precision(), 2);
        let low = mu.moment(&word(&[0, 0]), 1).unwrap();
        assert_eq!(low.precision(), 1);
        assert_eq!(low.coeff(&[1]), q(-8));
    }
}
