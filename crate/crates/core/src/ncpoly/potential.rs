use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_traits::Zero;

use crate::scalar::{Coeff, GaussRational, Scalar};
use crate::series::{Series, MAX_COUPLINGS};

use super::parse::ParsedPolynomial;
use super::{Color, Monomial, NcError, Polynomial};

/// A formal coupling `t_j`, optionally carrying a numeric value.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    pub name: String,
    pub value: Option<GaussRational>,
    /// Introduced for an unnamed term; its value is the written coefficient.
    pub anonymous: bool,
}

/// `weight · t_coupling · word`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialTerm<S> {
    pub coupling: usize,
    pub weight: S,
    pub word: Monomial,
}

/// `V = Σ_j w_j t_{c(j)} q_j` over `m` colours.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential<S> {
    colors: usize,
    couplings: Vec<Coupling>,
    terms: Vec<PotentialTerm<S>>,
}

impl<S: Scalar> Potential<S> {
    pub fn zero(colors: usize) -> Self {
        Potential {
            colors,
            couplings: Vec::new(),
            terms: Vec::new(),
        }
    }

    /// Builds and validates a potential.
    pub fn new(colors: usize, couplings: Vec<Coupling>, terms: Vec<PotentialTerm<S>>) -> Result<Self, NcError> {
        if couplings.len() > MAX_COUPLINGS {
            return Err(NcError::TooManyCouplings {
                max: MAX_COUPLINGS,
                got: couplings.len(),
            });
        }
        let colors = terms
            .iter()
            .map(|t| t.word.colors_used())
            .max()
            .unwrap_or(0)
            .max(colors);
        for t in &terms {
            if t.word.is_unit() {
                return Err(NcError::Parse {
                    pos: 0,
                    msg: "potential terms must be nonconstant".into(),
                });
            }
            assert!(t.coupling < couplings.len(), "term refers to an unknown coupling");
        }
        let v = Potential {
            colors,
            couplings,
            terms,
        };
        v.check_self_adjoint()?;
        Ok(v)
    }

    /// A single named coupling times a fixed polynomial, e.g. `t·(X₁⁴ + X₂⁴)`.
    pub fn single(
        name: &str,
        value: Option<GaussRational>,
        shape: &Polynomial<S>,
        colors: usize,
    ) -> Result<Self, NcError> {
        let terms = shape
            .terms()
            .map(|(m, c)| PotentialTerm {
                coupling: 0,
                weight: c.clone(),
                word: m.clone(),
            })
            .collect();
        Potential::new(
            colors,
            vec![Coupling {
                name: name.to_string(),
                value,
                anonymous: false,
            }],
            terms,
        )
    }

    pub(crate) fn from_parsed(parsed: &ParsedPolynomial, colors: usize) -> Result<Self, NcError> {
        let mut couplings: Vec<Coupling> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut terms = Vec::new();
        let mut unnamed = 0;
        for t in &parsed.terms {
            let (coupling, weight) = match &t.coupling {
                Some(name) => {
                    let k = *index.entry(name.clone()).or_insert_with(|| {
                        couplings.push(Coupling {
                            name: name.clone(),
                            value: None,
                            anonymous: false,
                        });
                        couplings.len() - 1
                    });
                    (k, S::from_parts(&t.coeff.re, &t.coeff.im))
                }
                None => {
                    unnamed += 1;
                    let mut name = format!("t{unnamed}");
                    while index.contains_key(&name) {
                        unnamed += 1;
                        name = format!("t{unnamed}");
                    }
                    index.insert(name.clone(), couplings.len());
                    couplings.push(Coupling {
                        name,
                        value: Some(t.coeff.clone()),
                        anonymous: true,
                    });
                    (couplings.len() - 1, S::one())
                }
            };
            terms.push(PotentialTerm {
                coupling,
                weight,
                word: t.word.clone(),
            });
        }
        Potential::new(colors, couplings, terms)
    }

    /// Checks that `Tr V` is real: for every cyclic class the total
    /// coefficient of `q*` is the conjugate of that of `q`. Named couplings
    /// are treated as real formal variables; valued couplings enter with
    /// their value.
    pub fn check_self_adjoint(&self) -> Result<(), NcError> {
        let mut groups: BTreeMap<Option<usize>, BTreeMap<Monomial, GaussRational>> = BTreeMap::new();
        for t in &self.terms {
            let c = &self.couplings[t.coupling];
            let w = t.weight.to_exact();
            let (key, coeff) = match &c.value {
                Some(v) if c.anonymous => (None, w.mul_ref(v)),
                Some(v) if !v.is_real() => {
                    return Err(NcError::SelfAdjointness(format!(
                        "named coupling `{}` must be real, got {v}",
                        c.name
                    )))
                }
                _ => (Some(t.coupling), w),
            };
            let entry = groups
                .entry(key)
                .or_default()
                .entry(t.word.cyclic_canonical())
                .or_insert_with(GaussRational::zero);
            entry.add_assign_ref(&coeff);
        }
        for (key, classes) in &groups {
            for (word, c) in classes {
                let adj = word.reversed().cyclic_canonical();
                let other = classes.get(&adj).cloned().unwrap_or_else(GaussRational::zero);
                if other != c.conj() {
                    let missing = c.conj() - if &adj == word { GaussRational::zero() } else { other };
                    let scope = match key {
                        Some(k) => format!(" (coupling `{}`)", self.couplings[*k].name),
                        None => String::new(),
                    };
                    return Err(NcError::SelfAdjointness(format!(
                        "term ({c})*{word} needs its conjugate ({})*{}{scope}",
                        missing,
                        word.reversed()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    /// Widens the colour count (never narrows it).
    pub fn with_colors(mut self, m: usize) -> Self {
        self.colors = self.colors.max(m);
        self
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn coupling_names(&self) -> Vec<String> {
        self.couplings.iter().map(|c| c.name.clone()).collect()
    }

    pub fn terms(&self) -> &[PotentialTerm<S>] {
        &self.terms
    }

    pub fn num_couplings(&self) -> usize {
        self.couplings.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximal degree `D` of a term of `V`.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.word.degree()).max().unwrap_or(0)
    }

    pub fn set_value(&mut self, name: &str, value: GaussRational) -> Result<(), NcError> {
        match self.couplings.iter_mut().find(|c| c.name == name) {
            Some(c) => {
                c.value = Some(value);
                self.check_self_adjoint()
            }
            None => Err(NcError::Parse {
                pos: 0,
                msg: format!("unknown coupling `{name}`"),
            }),
        }
    }

    pub fn coupling_values(&self) -> Result<Vec<GaussRational>, NcError> {
        self.couplings
            .iter()
            .map(|c| {
                c.value
                    .clone()
                    .ok_or_else(|| NcError::MissingCouplingValue(c.name.clone()))
            })
            .collect()
    }

    pub fn coupling_values_c64(&self) -> Result<Vec<Complex64>, NcError> {
        Ok(self.coupling_values()?.iter().map(Scalar::to_c64).collect())
    }

    /// `|t| = max_j |t_j|`, when all couplings have values.
    pub fn max_abs_coupling(&self) -> Option<f64> {
        let vals = self.coupling_values_c64().ok()?;
        Some(vals.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    /// `V` with formal couplings as series coefficients.
    pub fn series_polynomial(&self) -> Polynomial<Series<S>> {
        let mut p = Polynomial::zero();
        for t in &self.terms {
            p.add_term(t.word.clone(), Series::var(t.coupling).scale(&t.weight));
        }
        p
    }

    /// `V` with the numeric coupling values substituted.
    pub fn numeric_polynomial(&self) -> Result<Polynomial<S>, NcError> {
        let vals = self.coupling_values()?;
        let mut p = Polynomial::zero();
        for t in &self.terms {
            let v = &vals[t.coupling];
            p.add_term(t.word.clone(), t.weight.mul_ref(&S::from_parts(&v.re, &v.im)));
        }
        Ok(p)
    }

    /// `D_i V` with formal couplings, one entry per colour.
    pub fn series_gradient(&self) -> Vec<Polynomial<Series<S>>> {
        self.series_polynomial().cyclic_gradient(self.colors)
    }

    pub fn numeric_gradient(&self) -> Result<Vec<Polynomial<S>>, NcError> {
        Ok(self.numeric_polynomial()?.cyclic_gradient(self.colors))
    }

    /// The potential with every coupling value multiplied by `alpha`.
    pub fn scaled_values(&self, alpha: &GaussRational) -> Self {
        let mut out = self.clone();
        for c in &mut out.couplings {
            if let Some(v) = &c.value {
                c.value = Some(v.mul_ref(alpha));
            }
        }
        out
    }

    pub fn map_scalar<T: Scalar>(&self) -> Potential<T> {
        Potential {
            colors: self.colors,
            couplings: self.couplings.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let w = t.weight.to_exact();
                    PotentialTerm {
                        coupling: t.coupling,
                        weight: T::from_parts(&w.re, &w.im),
                        word: t.word.clone(),
                    }
                })
                .collect(),
        }
    }

    /// Per-colour list of `(coupling, weight · D_i q_j)` pieces, used by the
    /// recursions that need to know which coupling each term carries.
    pub fn gradient_pieces(&self) -> Vec<Vec<(usize, Polynomial<S>)>> {
        Color::all(self.colors)
            .map(|i| {
                self.terms
                    .iter()
                    .map(|t| {
                        (
                            t.coupling,
                            Polynomial::word(t.word.clone()).cyclic_derivative(i).scale(&t.weight),
                        )
                    })
                    .filter(|(_, p)| !p.is_zero())
                    .collect()
            })
            .collect()
    }
}

impl<S: Scalar> fmt::Display for Potential<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let name = &self.couplings[t.coupling].name;
            if t.weight.is_one() {
                write!(f, "{name}*{}", t.word)?;
            } else {
                write!(f, "({})*{name}*{}", t.weight, t.word)?;
            }
        }
        Ok(())
    }
}
