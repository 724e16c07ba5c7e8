use mmwb_core::ncpoly::parse_polynomial;
use mmwb_core::{Complex64, FloatPolynomial};
use serde::Serialize;

use crate::config::MatrixEnsembleConfig;
use crate::sampler::{collect_rows, ChainOutput};
use crate::stats::SampleStats;
use crate::McError;

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub label: String,
    pub poly: FloatPolynomial,
}

impl Observable {
    pub fn new(label: impl Into<String>, poly: FloatPolynomial) -> Self {
        Observable {
            label: label.into(),
            poly,
        }
    }

    pub fn parse(text: &str) -> Result<Self, McError> {
        let text = text.trim();
        Ok(Observable::new(text, parse_polynomial::<Complex64>(text)?))
    }

    /// Comma-separated polynomials, e.g. `"x1^2,x1^4"`.
    pub fn parse_list(text: &str) -> Result<Vec<Self>, McError> {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(Observable::parse)
            .collect()
    }
}

/// Per-observable statistics of `(1/N) Re Tr P(A)`.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: MatrixEnsembleConfig,
    pub stats: Vec<SampleStats>,
    /// Per chain; `None` for unconstrained exact draws.
    pub acceptance: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

/// Sampled observable values, one table per chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleTrace {
    pub labels: Vec<String>,
    pub chains: Vec<Vec<Vec<f64>>>,
}

impl SampleTrace {
    pub fn width(&self) -> usize {
        self.labels.len()
    }

    /// All rows, chain by chain.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.chains.iter().flatten().cloned().collect()
    }

    pub fn column(&self, chain: usize, k: usize) -> Vec<f64> {
        self.chains[chain].iter().map(|r| r[k]).collect()
    }

    pub fn stats(&self, k: usize) -> SampleStats {
        let cols: Vec<Vec<f64>> = (0..self.chains.len()).map(|c| self.column(c, k)).collect();
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        SampleStats::from_chains(self.labels[k].clone(), &refs)
    }
}

/// Samples the ensemble and records `(1/N) Re Tr P(A)` for each observable.
pub fn run(cfg: &MatrixEnsembleConfig, observables: &[Observable]) -> Result<(RunReport, SampleTrace), McError> {
    let polys: Vec<FloatPolynomial> = observables.iter().map(|o| o.poly.clone()).collect();
    let nf = cfg.n as f64;
    let outputs = collect_rows(cfg, |d| Ok(d.traces(&polys)?.into_iter().map(|z| z.re / nf).collect()))?;
    Ok(assemble(cfg, observables, outputs))
}

pub(crate) fn assemble(
    cfg: &MatrixEnsembleConfig,
    observables: &[Observable],
    outputs: Vec<ChainOutput>,
) -> (RunReport, SampleTrace) {
    let mut acceptance = Vec::new();
    let mut warnings = Vec::new();
    let mut chains = Vec::new();
    for (i, out) in outputs.into_iter().enumerate() {
        acceptance.push(out.acceptance);
        warnings.extend(out.warnings.into_iter().map(|w| format!("chain {i}: {w}")));
        chains.push(out.rows);
    }
    let trace = SampleTrace {
        labels: observables.iter().map(|o| o.label.clone()).collect(),
        chains,
    };
    let stats = (0..trace.width()).map(|k| trace.stats(k)).collect();
    let report = RunReport {
        config: cfg.clone(),
        stats,
        acceptance,
        warnings,
    };
    (report, trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observable_lists() {
        let obs = Observable::parse_list("x1^2, x1^4,,x1*x2").unwrap();
        assert_eq!(obs.len(), 3);
        assert_eq!(obs[1].label, "x1^4");
        assert!(Observable::parse_list("x1^").is_err());
    }

    #[test]
    fn chains_split_samples_and_keep_order() {
        let mut cfg = MatrixEnsembleConfig::gue(6, 1, 11, 9);
        cfg.chains = 3;
        let obs = Observable::parse_list("x1^2").unwrap();
        let (report, trace) = run(&cfg, &obs).unwrap();
        let sizes: Vec<usize> = trace.chains.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![4, 4, 3]);
        assert_eq!(report.stats[0].n, 11);
        let (_, again) = run(&cfg, &obs).unwrap();
        assert_eq!(trace, again);
    }
}
