//! Coloured-star maps: brute-force census by genus and the planar /
//! genus-one recursions for their generating functions.

mod census;
mod recursion;

pub use census::{
    census, census_of_words, census_with_cap, enumerate_matchings, GenusCensus, MatchingTally, PairedDiagram, Star,
    DEFAULT_HALF_EDGE_CAP,
};
pub use recursion::{one_star_genus1, two_star_planar, MapRecursion};

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_traits::Zero;
use thiserror::Error;

use crate::ncpoly::{Monomial, Potential};
use crate::scalar::Scalar;
use crate::series::{MultiIndex, Series, MAX_COUPLINGS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("the unit monomial has no star")]
    ConstantStar,
    #[error("diagram is not connected")]
    Disconnected,
    #[error("{half_edges} half-edges exceed the brute-force cap of {cap}")]
    CapExceeded { half_edges: usize, cap: usize },
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error(transparent)]
    Solver(#[from] Box<crate::sdsolve::SolveError>),
}

impl From<crate::sdsolve::SolveError> for MapError {
    fn from(e: crate::sdsolve::SolveError) -> Self {
        MapError::Solver(Box::new(e))
    }
}

fn cached_census(words: &[Monomial], cap: usize) -> Result<GenusCensus, MapError> {
    static CACHE: OnceLock<Mutex<HashMap<Vec<Monomial>, GenusCensus>>> = OnceLock::new();
    let total: usize = words.iter().map(Monomial::degree).sum();
    if total > cap {
        return Err(MapError::CapExceeded { half_edges: total, cap });
    }
    let mut key: Vec<Monomial> = words.iter().map(Monomial::cyclic_canonical).collect();
    key.sort();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().unwrap().get(&key) {
        return Ok(c.clone());
    }
    let c = census_of_words(&key, cap)?;
    cache.lock().unwrap().insert(key, c.clone());
    Ok(c)
}

/// Exponent vectors `k ∈ N^n` with `|k| ≤ order`, in graded order.
pub fn star_multiplicities(n: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[pos] = k;
            rec(pos + 1, left - k, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, order, &mut cur, &mut out);
    out.sort_by_key(|k| k.iter().sum::<usize>());
    out
}

/// `Σ_k Π_j (−w_j t_{c(j)})^{k_j}/k_j! · census(fixed ∪ k_j stars of q_j).g`,
/// truncated at total order `order`. With no fixed stars the empty
/// configuration is excluded.
pub fn census_series<S: Scalar>(
    fixed: &[Monomial],
    v: &Potential<S>,
    order: usize,
    genus: usize,
    cap: usize,
) -> Result<Series<S>, MapError> {
    let terms = v.terms();
    let mut out = Series::zero_to(order);
    for k in star_multiplicities(terms.len(), order) {
        if fixed.is_empty() && k.iter().all(|&x| x == 0) {
            continue;
        }
        let mut words: Vec<Monomial> = fixed.to_vec();
        let mut exps = [0u8; MAX_COUPLINGS];
        let mut coeff = S::one();
        for (j, &kj) in k.iter().enumerate() {
            for _ in 0..kj {
                words.push(terms[j].word.clone());
            }
            exps[terms[j].coupling] += kj as u8;
            let neg_w = -terms[j].weight.clone();
            for r in 1..=kj {
                coeff = coeff.mul_ref(&neg_w).scale(&S::from_ratio(1, r as i64));
            }
        }
        if coeff.is_zero() {
            continue;
        }
        let count = cached_census(&words, cap)?.get(genus);
        if count == 0 {
            continue;
        }
        let count = S::from_parts(
            &num_rational::BigRational::from_integer(count.into()),
            &num_rational::BigRational::zero(),
        );
        out.add_term(MultiIndex::from_exponents(&exps), coeff.mul_ref(&count));
    }
    Ok(out)
}
