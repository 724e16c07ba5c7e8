//! Exact Gaussian expectations at finite `N` by Wick contraction.
//!
//! `E[(1/N) Tr A_{i_1}⋯A_{i_p}]` for independent GUE matrices with entry
//! variance `1/N` is a sum over colour-respecting pairings of the positions.
//! Each pairing identifies matrix indices; the free index loops left over
//! give a power of `N`. Loops are counted with a union-find on the `p` index
//! variables, independently of any face tracing.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::mapcount::MapError;
use crate::ncpoly::Monomial;

/// A Laurent polynomial in `N`, stored as exponent → coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InverseNPolynomial {
    #[serde(serialize_with = "serialize_terms")]
    terms: BTreeMap<i64, BigRational>,
}

fn serialize_terms<S: serde::Serializer>(t: &BTreeMap<i64, BigRational>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(t.len()))?;
    for (k, v) in t {
        m.serialize_entry(&k.to_string(), &v.to_string())?;
    }
    m.end()
}

impl InverseNPolynomial {
    pub fn add_term(&mut self, exponent: i64, c: BigRational) {
        let e = self.terms.entry(exponent).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&exponent);
        }
    }

    /// Coefficient of `N^exponent`.
    pub fn coeff(&self, exponent: i64) -> BigRational {
        self.terms.get(&exponent).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &BigRational)> {
        self.terms.iter()
    }

    pub fn eval(&self, n: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64().unwrap_or(f64::NAN) * n.powi(*e as i32))
            .sum()
    }

    /// Exact value at an integer `N`.
    pub fn eval_exact(&self, n: i64) -> BigRational {
        let n = BigRational::from_integer(BigInt::from(n));
        self.terms.iter().fold(BigRational::zero(), |acc, (e, c)| {
            let p = if *e >= 0 {
                num_traits::pow(n.clone(), *e as usize)
            } else {
                num_traits::pow(n.recip(), (-*e) as usize)
            };
            acc + c * p
        })
    }
}

impl fmt::Display for InverseNPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            match e {
                0 => write!(f, "{c}")?,
                _ => write!(f, "{c}*N^{e}")?,
            }
        }
        Ok(())
    }
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

fn index_loops(pairing: &[usize]) -> usize {
    let p = pairing.len();
    let mut parent: Vec<usize> = (0..p).collect();
    let mut loops = p;
    let mut join = |a: usize, b: usize, parent: &mut Vec<usize>| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra] = rb;
            loops -= 1;
        }
    };
    // Position k carries A_{a_k, a_{k+1}}; E[A_{ab} A_{cd}] = δ_ad δ_bc / N.
    for k in 0..p {
        let l = pairing[k];
        if k < l {
            join(k, (l + 1) % p, &mut parent);
            join((k + 1) % p, l, &mut parent);
        }
    }
    loops
}

/// `E[(1/N) Tr q(A)]` for independent GUE matrices, as a Laurent polynomial in `N`.
pub fn wick_finite_n(q: &Monomial, cap: usize) -> Result<InverseNPolynomial, MapError> {
    let letters = q.letters();
    let p = letters.len();
    if p > cap {
        return Err(MapError::CapExceeded { half_edges: p, cap });
    }
    let mut out = InverseNPolynomial::default();
    if p == 0 {
        out.add_term(0, BigRational::from_integer(1.into()));
        return Ok(out);
    }
    if p % 2 == 1 {
        return Ok(out);
    }
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    let mut pairing = vec![usize::MAX; p];
    fn rec(letters: &[u8], pairing: &mut Vec<usize>, counts: &mut BTreeMap<i64, u64>) {
        let p = letters.len();
        let Some(i) = pairing.iter().position(|&x| x == usize::MAX) else {
            let e = index_loops(pairing) as i64 - 1 - (p / 2) as i64;
            *counts.entry(e).or_insert(0) += 1;
            return;
        };
        for j in i + 1..p {
            if pairing[j] == usize::MAX && letters[j] == letters[i] {
                pairing[i] = j;
                pairing[j] = i;
                rec(letters, pairing, counts);
                pairing[i] = usize::MAX;
                pairing[j] = usize::MAX;
            }
        }
    }
    rec(letters, &mut pairing, &mut counts);
    for (e, c) in counts {
        out.add_term(e, BigRational::from_integer(c.into()));
    }
    Ok(out)
}
