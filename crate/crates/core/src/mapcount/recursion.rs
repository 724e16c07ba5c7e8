//! Generating functions of planar maps with two marked stars, `M(P, Q)`,
//! and of genus-one maps with one marked star, `M¹(P)`, by the recursions
//! obtained from removing the first half-edge of the marked star `P`.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::ncpoly::{Monomial, Potential};
use crate::scalar::{Coeff, Scalar};
use crate::sdsolve::{Moments, SeriesState, SolveError};
use crate::series::Series;

pub struct MapRecursion<'a, S: Scalar> {
    mu: &'a SeriesState<S>,
    gradient: Vec<Vec<(usize, Monomial, S)>>,
    planar: Mutex<HashMap<(Monomial, Monomial), Series<S>>>,
    genus1: Mutex<HashMap<Monomial, Series<S>>>,
}

impl<'a, S: Scalar> MapRecursion<'a, S> {
    /// `mu` must be the series state of the same potential.
    pub fn new(mu: &'a SeriesState<S>, v: &Potential<S>) -> Self {
        let mut gradient: Vec<Vec<(usize, Monomial, S)>> = v
            .gradient_pieces()
            .into_iter()
            .map(|pieces| {
                pieces
                    .into_iter()
                    .flat_map(|(k, p)| p.into_terms().map(move |(u, c)| (k, u, c)))
                    .collect()
            })
            .collect();
        gradient.resize(mu.colors().max(gradient.len()), Vec::new());
        MapRecursion {
            mu,
            gradient,
            planar: Mutex::new(HashMap::new()),
            genus1: Mutex::new(HashMap::new()),
        }
    }

    fn mu(&self, letters: &[u8], k: usize) -> Result<Series<S>, SolveError> {
        self.mu.moment(&Monomial::from_indices(letters), k)
    }

    /// `M(P, Q)` to total order `k`.
    pub fn two_star(&self, p: &Monomial, q: &Monomial, k: usize) -> Result<Series<S>, SolveError> {
        let k = k.min(self.mu.order());
        if p.is_unit() || q.is_unit() {
            return Ok(Series::zero_to(k));
        }
        let (a, b) = (p.cyclic_canonical(), q.cyclic_canonical());
        let key = if a <= b { (a, b) } else { (b, a) };
        if let Some(s) = self.planar.lock().unwrap().get(&key) {
            if s.precision() >= k {
                return Ok(s.truncate(k));
            }
        }
        let (p, q) = (&key.0, &key.1);
        let letters = p.letters();
        let i = letters[0];
        let rest = &letters[1..];
        let mut acc = Series::zero_to(k);
        for (j, &l) in rest.iter().enumerate() {
            if l != i {
                continue;
            }
            let (r, s) = (&rest[..j], &rest[j + 1..]);
            let ms = self.mu(s, k)?;
            if !ms.is_empty() {
                acc.add_assign_ref(&self.two_star(&Monomial::from_indices(r), q, k)?.mul_ref(&ms));
            }
            let mr = self.mu(r, k)?;
            if !mr.is_empty() {
                acc.add_assign_ref(&mr.mul_ref(&self.two_star(&Monomial::from_indices(s), q, k)?));
            }
        }
        if k >= 1 {
            for (coupling, u, c) in &self.gradient[i as usize] {
                let m = self.two_star(&Monomial::concat3(u.letters(), rest, &[]), q, k - 1)?;
                if !m.is_empty() {
                    acc.sub_assign_ref(&Series::var(*coupling).mul_ref(&m).scale(c));
                }
            }
        }
        // μ(D_i Q · rest)
        let ql = q.letters();
        for (j, &l) in ql.iter().enumerate() {
            if l == i {
                acc.add_assign_ref(&self.mu(&[&ql[j + 1..], &ql[..j], rest].concat(), k)?);
            }
        }
        let acc = acc.truncate(k);
        let mut memo = self.planar.lock().unwrap();
        if memo.get(&key).is_none_or(|s| s.precision() < k) {
            memo.insert(key, acc.clone());
        }
        Ok(acc)
    }

    /// `M¹(P)` to total order `k`.
    pub fn genus_one(&self, p: &Monomial, k: usize) -> Result<Series<S>, SolveError> {
        let k = k.min(self.mu.order());
        if p.is_unit() {
            return Ok(Series::zero_to(k));
        }
        let key = p.cyclic_canonical();
        if let Some(s) = self.genus1.lock().unwrap().get(&key) {
            if s.precision() >= k {
                return Ok(s.truncate(k));
            }
        }
        let letters = key.letters();
        let i = letters[0];
        let rest = &letters[1..];
        let mut acc = Series::zero_to(k);
        for (j, &l) in rest.iter().enumerate() {
            if l != i {
                continue;
            }
            let (r, s) = (
                Monomial::from_indices(&rest[..j]),
                Monomial::from_indices(&rest[j + 1..]),
            );
            let ms = self.mu.moment(&s, k)?;
            if !ms.is_empty() {
                acc.add_assign_ref(&self.genus_one(&r, k)?.mul_ref(&ms));
            }
            let mr = self.mu.moment(&r, k)?;
            if !mr.is_empty() {
                acc.add_assign_ref(&mr.mul_ref(&self.genus_one(&s, k)?));
            }
            acc.add_assign_ref(&self.two_star(&r, &s, k)?);
        }
        if k >= 1 {
            for (coupling, u, c) in &self.gradient[i as usize] {
                let m = self.genus_one(&Monomial::concat3(u.letters(), rest, &[]), k - 1)?;
                if !m.is_empty() {
                    acc.sub_assign_ref(&Series::var(*coupling).mul_ref(&m).scale(c));
                }
            }
        }
        let acc = acc.truncate(k);
        let mut memo = self.genus1.lock().unwrap();
        if memo.get(&key).is_none_or(|s| s.precision() < k) {
            memo.insert(key, acc.clone());
        }
        Ok(acc)
    }
}

/// `M(P, Q)` for the potential `v`, truncated at total order `order`.
pub fn two_star_planar<S: Scalar>(
    p: &Monomial,
    q: &Monomial,
    v: &Potential<S>,
    order: usize,
) -> Result<Series<S>, SolveError> {
    let m = v.colors().max(p.colors_used()).max(q.colors_used());
    let mu = SeriesState::new(&v.clone().with_colors(m), order);
    MapRecursion::new(&mu, &v.clone().with_colors(m)).two_star(p, q, order)
}

/// `M¹(P)` for the potential `v`, truncated at total order `order`.
pub fn one_star_genus1<S: Scalar>(p: &Monomial, v: &Potential<S>, order: usize) -> Result<Series<S>, SolveError> {
    let m = v.colors().max(p.colors_used());
    let mu = SeriesState::new(&v.clone().with_colors(m), order);
    MapRecursion::new(&mu, &v.clone().with_colors(m)).genus_one(p, order)
}
