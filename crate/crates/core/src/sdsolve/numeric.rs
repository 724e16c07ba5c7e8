use std::collections::HashMap;

use num_complex::Complex64;

use crate::ncpoly::{Color, Monomial, Potential};
use crate::scalar::Scalar;

use super::{canonical_words, Moments, SeriesState, SolveError, SolverConfig};

/// `μ_t` at fixed numeric couplings, for all canonical words up to a degree cap.
#[derive(Clone, Debug)]
pub struct NumericState {
    colors: usize,
    max_degree: usize,
    values: HashMap<Monomial, Complex64>,
    sweeps: usize,
}

impl NumericState {
    /// Damped fixed-point iteration of the Schwinger–Dyson rearrangement,
    /// sweeping words in degree order and updating in place. Moments above
    /// the degree cap are frozen at their Gaussian values.
    pub fn solve<S: Scalar>(v: &Potential<S>, cfg: &SolverConfig) -> Result<NumericState, SolveError> {
        let m = v.colors();
        let required = v.degree().max(2);
        if cfg.max_degree < required {
            return Err(SolveError::CapTooSmall {
                cap: cfg.max_degree,
                required,
            });
        }
        let values_t = v.coupling_values_c64()?;
        let gradient: Vec<Vec<(Monomial, Complex64)>> = v
            .gradient_pieces()
            .into_iter()
            .map(|pieces| {
                pieces
                    .into_iter()
                    .flat_map(|(k, p)| {
                        let t = values_t[k];
                        p.into_terms()
                            .map(move |(u, c)| (u, c.to_c64() * t))
                            .collect::<Vec<_>>()
                    })
                    .collect()
            })
            .collect();

        let gaussian = SeriesState::<Complex64>::new(&Potential::zero(m), 0);
        let words = canonical_words(m, cfg.max_degree);
        let n = words.len();
        // Slots 0..n are unknowns; later slots hold the unit and frozen tail values.
        let mut index: HashMap<Monomial, usize> = words.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect();
        let mut values: Vec<Complex64> = words
            .iter()
            .map(|w| gaussian.moment(w, 0).map(|s| s.constant_term()).unwrap_or_default())
            .collect();
        let mut slot = |letters: &[u8], values: &mut Vec<Complex64>| -> usize {
            let w = Monomial::from_indices(letters).cyclic_canonical();
            if let Some(&k) = index.get(&w) {
                return k;
            }
            let x = gaussian.moment(&w, 0).map(|s| s.constant_term()).unwrap_or_default();
            values.push(x);
            index.insert(w, values.len() - 1);
            values.len() - 1
        };
        let unit = slot(&[], &mut values);
        values[unit] = Complex64::new(1.0, 0.0);

        struct Equation {
            products: Vec<(usize, usize)>,
            linear: Vec<(usize, Complex64)>,
        }
        let mut equations = Vec::with_capacity(n);
        for w in &words {
            let letters = w.letters();
            let i = letters[0] as usize;
            let rest = &letters[1..];
            let mut products = Vec::new();
            for (j, &l) in rest.iter().enumerate() {
                if l as usize == i {
                    products.push((slot(&rest[..j], &mut values), slot(&rest[j + 1..], &mut values)));
                }
            }
            let mut linear: Vec<(usize, Complex64)> = Vec::new();
            for (u, c) in &gradient[i] {
                let k = slot(&[u.letters(), rest].concat(), &mut values);
                match linear.iter_mut().find(|(x, _)| *x == k) {
                    Some(e) => e.1 -= c,
                    None => linear.push((k, -c)),
                }
            }
            equations.push(Equation { products, linear });
        }

        let mut state = NumericState {
            colors: m,
            max_degree: cfg.max_degree,
            values: HashMap::new(),
            sweeps: 0,
        };
        let mut change = f64::INFINITY;
        while state.sweeps < cfg.max_iter {
            state.sweeps += 1;
            change = 0.0;
            for (k, eq) in equations.iter().enumerate() {
                let mut f = Complex64::new(0.0, 0.0);
                for &(a, b) in &eq.products {
                    f += values[a] * values[b];
                }
                for &(a, c) in &eq.linear {
                    f += c * values[a];
                }
                let old = values[k];
                let new = old + (f - old) * cfg.damping;
                if !new.re.is_finite() || !new.im.is_finite() {
                    return Err(SolveError::MomentBoundViolation {
                        color: words[k].letters()[0] as usize + 1,
                        degree: words[k].degree(),
                        value: f64::INFINITY,
                        bound: cfg.moment_bound,
                    });
                }
                change = change.max((new - old).norm() / new.norm().max(1.0));
                values[k] = new;
            }
            if change < cfg.tol {
                break;
            }
        }
        if change >= cfg.tol {
            return Err(SolveError::NoConvergence {
                iterations: state.sweeps,
                change,
            });
        }
        let mut values: HashMap<Monomial, Complex64> = words.into_iter().zip(values).collect();
        values.insert(Monomial::unit(), Complex64::new(1.0, 0.0));
        state.values = values;
        state.check_moment_bound(cfg.moment_bound)?;
        Ok(state)
    }

    /// `|μ(X_i^d)| ≤ C^d` for every colour and stored degree.
    pub fn check_moment_bound(&self, bound: f64) -> Result<(), SolveError> {
        for i in Color::all(self.colors) {
            for d in 1..=self.max_degree {
                let w = Monomial::power(i, d);
                let value = self.values.get(&w).map_or(0.0, |x| x.norm());
                if value > bound.powi(d as i32) {
                    return Err(SolveError::MomentBoundViolation {
                        color: i.index() + 1,
                        degree: d,
                        value,
                        bound,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn values(&self) -> Vec<(Monomial, Complex64)> {
        let mut v: Vec<_> = self.values.iter().map(|(w, x)| (w.clone(), *x)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

impl Moments<Complex64> for NumericState {
    fn moment(&self, w: &Monomial, _precision: usize) -> Result<Complex64, SolveError> {
        if w.degree() > self.max_degree {
            return Err(SolveError::DegreeCap {
                requested: w.degree(),
                cap: self.max_degree,
            });
        }
        Ok(self.values.get(&w.cyclic_canonical()).copied().unwrap_or_default())
    }

    fn order(&self) -> usize {
        crate::scalar::EXACT
    }

    fn colors(&self) -> usize {
        self.colors
    }
}
