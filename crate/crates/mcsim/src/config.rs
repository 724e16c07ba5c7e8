use std::fmt;
use std::str::FromStr;

use mmwb_core::{FloatPolynomial, FloatPotential};
use serde::Serialize;

use crate::McError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    ExactGue,
    Metropolis,
    Langevin,
}

impl FromStr for SamplerKind {
    type Err = McError;

    fn from_str(s: &str) -> Result<Self, McError> {
        match s {
            "exact-gue" | "gue" => Ok(SamplerKind::ExactGue),
            "metropolis" => Ok(SamplerKind::Metropolis),
            "langevin" | "mala" => Ok(SamplerKind::Langevin),
            _ => Err(McError::InvalidConfig(format!(
                "unknown sampler {s:?} (expected exact-gue, metropolis or langevin)"
            ))),
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::ExactGue => "exact-gue",
            SamplerKind::Metropolis => "metropolis",
            SamplerKind::Langevin => "langevin",
        })
    }
}

/// How a draw is carried.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    /// Spectral for single-matrix Metropolis, full matrices otherwise.
    Auto,
    Matrix,
    /// Eigenvalues only (`m = 1`): the tridiagonal model for exact draws and
    /// the Coulomb gas for Metropolis. Traces are unitarily invariant, so
    /// every observable keeps its law.
    Spectral,
}

impl FromStr for Representation {
    type Err = McError;

    fn from_str(s: &str) -> Result<Self, McError> {
        match s {
            "auto" => Ok(Representation::Auto),
            "matrix" => Ok(Representation::Matrix),
            "spectral" => Ok(Representation::Spectral),
            _ => Err(McError::InvalidConfig(format!("unknown representation {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixEnsembleConfig {
    pub n: usize,
    pub m: usize,
    #[serde(serialize_with = "display")]
    pub potential: FloatPotential,
    pub sampler: SamplerKind,
    pub representation: Representation,
    pub step: f64,
    pub burn_in: usize,
    pub samples: usize,
    /// Sweeps between emitted samples.
    pub thinning: usize,
    pub seed: u64,
    /// Reject any state with a matrix of operator norm `≥ L`.
    pub cutoff: Option<f64>,
    /// Without a cutoff, warn once an operator norm exceeds this.
    pub spectral_guard: f64,
    pub chains: usize,
}

fn display<S: serde::Serializer, T: fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl MatrixEnsembleConfig {
    pub fn gue(n: usize, m: usize, samples: usize, seed: u64) -> Self {
        MatrixEnsembleConfig {
            n,
            m,
            potential: FloatPotential::zero(m),
            sampler: SamplerKind::ExactGue,
            representation: Representation::Auto,
            step: 1.0,
            burn_in: 0,
            samples,
            thinning: 1,
            seed,
            cutoff: None,
            spectral_guard: 10.0,
            chains: 1,
        }
    }

    pub fn gibbs(n: usize, potential: FloatPotential, sampler: SamplerKind, samples: usize, seed: u64) -> Self {
        let m = potential.colors().max(1);
        MatrixEnsembleConfig {
            potential,
            sampler,
            step: 1.0,
            burn_in: 500,
            ..Self::gue(n, m, samples, seed)
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        let bad = |s: String| Err(McError::InvalidConfig(s));
        if self.n < 2 {
            return bad(format!("matrix size N = {} must be at least 2", self.n));
        }
        if self.m == 0 {
            return bad("matrix count m must be at least 1".into());
        }
        if self.potential.colors() > self.m {
            return bad(format!(
                "potential uses {} matrices but m = {}",
                self.potential.colors(),
                self.m
            ));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!("step {} must be positive", self.step));
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.thinning == 0 || self.chains == 0 {
            return bad("thinning and chains must be at least 1".into());
        }
        if let Some(l) = self.cutoff {
            if !(l > 0.0) {
                return bad(format!("cutoff L = {l} must be positive"));
            }
        }
        if self.sampler == SamplerKind::ExactGue && !self.potential.is_zero() {
            return bad("exact-gue samples V = 0 only; use metropolis or langevin".into());
        }
        if self.representation == Representation::Spectral && self.m != 1 {
            return bad("the spectral representation needs m = 1".into());
        }
        if self.representation == Representation::Spectral && self.sampler == SamplerKind::Langevin {
            return bad("langevin runs on full matrices".into());
        }
        self.numeric_potential()?;
        Ok(())
    }

    /// `V` with its coupling values substituted.
    pub fn numeric_potential(&self) -> Result<FloatPolynomial, McError> {
        let p = self.potential.numeric_polynomial()?;
        if p.terms().any(|(_, c)| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(McError::InvalidConfig("non-finite coupling".into()));
        }
        Ok(p)
    }

    pub fn spectral(&self) -> bool {
        match self.representation {
            Representation::Spectral => true,
            Representation::Matrix => false,
            Representation::Auto => self.m == 1 && self.sampler == SamplerKind::Metropolis,
        }
    }

    /// Coefficients of `W(x) = x²/2 + V(x)` for a single matrix, real parts.
    pub fn univariate_w(&self) -> Result<Vec<f64>, McError> {
        let v = self.numeric_potential()?;
        let mut w = vec![0.0; v.degree().max(2) + 1];
        w[2] += 0.5;
        for (word, c) in v.terms() {
            if word.letters().iter().any(|&l| l != 0) {
                return Err(McError::InvalidConfig(
                    "spectral sampling needs a one-matrix potential".into(),
                ));
            }
            w[word.degree()] += c.re;
        }
        Ok(w)
    }
}

pub(crate) fn eval_real_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}
