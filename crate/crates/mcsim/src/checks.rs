use mmwb_core::freeenergy::ThermoReference;
use mmwb_core::{Complex64, FloatPolynomial, GaussRational, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::MatrixEnsembleConfig;
use crate::matrix::{gue_matrix, CMatrix, WordEvaluator};
use crate::run::{run, Observable};
use crate::sampler::{collect_rows, Chain};
use crate::stats::{effective_sample_size, mean, shape, variance_with_error, Z99};
use crate::McError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationReport {
    pub observable: String,
    pub samples: usize,
    pub ess: f64,
    pub predicted: f64,
    pub sample_variance: f64,
    pub variance_std_error: f64,
    pub ci99: (f64, f64),
    pub relative_error: f64,
    /// Sample mean of `Tr P(A) − N μ(P)`.
    pub mean_offset: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub z_skewness: f64,
    pub z_kurtosis: f64,
    /// The prediction lies in the 99% confidence interval.
    pub passed: bool,
}

impl FluctuationReport {
    pub fn within(&self, rel: f64) -> bool {
        self.relative_error <= rel
    }

    pub fn looks_gaussian(&self, z: f64) -> bool {
        self.z_skewness.abs() < z && self.z_kurtosis.abs() < z
    }
}

/// Samples `Tr P(A) − N μ(P)` and compares its variance with `sigma2_pred`.
/// Without `mu`, the sample mean centres the statistic.
pub fn fluctuation_test(
    cfg: &MatrixEnsembleConfig,
    p: &Observable,
    sigma2_pred: f64,
    mu: Option<f64>,
) -> Result<FluctuationReport, McError> {
    let polys = [p.poly.clone()];
    let outputs = collect_rows(cfg, |d| Ok(vec![d.traces(&polys)?[0].re]))?;
    let xs: Vec<f64> = outputs.iter().flat_map(|o| o.rows.iter().map(|r| r[0])).collect();
    let centre = mu.unwrap_or_else(|| mean(&xs) / cfg.n as f64);
    let delta: Vec<f64> = xs.iter().map(|x| x - cfg.n as f64 * centre).collect();
    Ok(fluctuation_report(&p.label, &delta, sigma2_pred))
}

/// The report for precomputed fluctuation samples.
pub fn fluctuation_report(label: &str, delta: &[f64], sigma2_pred: f64) -> FluctuationReport {
    let (s2, se) = variance_with_error(delta);
    let ess = effective_sample_size(delta);
    let (skew, kurt) = shape(delta);
    let ci99 = (s2 - Z99 * se, s2 + Z99 * se);
    FluctuationReport {
        observable: label.to_string(),
        samples: delta.len(),
        ess,
        predicted: sigma2_pred,
        sample_variance: s2,
        variance_std_error: se,
        ci99,
        relative_error: (s2 - sigma2_pred).abs() / sigma2_pred.abs(),
        mean_offset: mean(delta),
        skewness: skew,
        excess_kurtosis: kurt,
        z_skewness: skew / (6.0 / ess).sqrt(),
        z_kurtosis: kurt / (24.0 / ess).sqrt(),
        passed: ci99.0 <= sigma2_pred && sigma2_pred <= ci99.1,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub n: usize,
    pub samples: usize,
    pub exceed: usize,
    pub frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub threshold: f64,
    pub rows: Vec<TailRow>,
    /// Frequencies are non-increasing in `N`.
    pub passed: bool,
}

/// Frequency of `{λ_max > M}` at each matrix size.
pub fn tail_test(cfg: &MatrixEnsembleConfig, threshold: f64, sizes: &[usize]) -> Result<TailReport, McError> {
    let mut rows = Vec::new();
    for &n in sizes {
        let c = MatrixEnsembleConfig { n, ..cfg.clone() };
        let outputs = collect_rows(&c, |d| Ok(vec![f64::from(u8::from(d.lambda_max() > threshold))]))?;
        let hits: Vec<f64> = outputs.iter().flat_map(|o| o.rows.iter().map(|r| r[0])).collect();
        let exceed = hits.iter().filter(|&&h| h > 0.0).count();
        rows.push(TailRow {
            n,
            samples: hits.len(),
            exceed,
            frequency: exceed as f64 / hits.len() as f64,
        });
    }
    let passed = rows.windows(2).all(|w| w[1].frequency <= w[0].frequency);
    Ok(TailReport {
        threshold,
        rows,
        passed,
    })
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(k: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if k == 0 {
                1.0
            } else if k == 1 {
                x
            } else {
                p1
            };
            let prev = if k == 1 { 1.0 } else { p0 };
            dp = k as f64 * (x * p - prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoNode {
    pub alpha: f64,
    pub weight: f64,
    /// `E_{αV}[(1/N) Tr V(A)]`.
    pub mean_trace_v: f64,
    pub std_error: f64,
}

/// Thermodynamic integration `log Z = −N² ∫₀¹ E_{αV}[(1/N) Tr V] dα`
/// beside the series `N² F⁰ + F¹`. A demonstration, not a test: the `O(1)`
/// term is far below the statistical error at any size where `N²F⁰`
/// dominates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    pub n: usize,
    pub nodes: Vec<ThermoNode>,
    pub log_z: f64,
    pub log_z_std_error: f64,
    pub series_order: usize,
    pub f0: f64,
    pub f1: f64,
    pub series_log_z: f64,
}

pub fn thermo_integration(
    cfg: &MatrixEnsembleConfig,
    nodes: usize,
    series_order: usize,
) -> Result<ThermoReport, McError> {
    let v = cfg.numeric_potential()?;
    let obs = [Observable::new("V", v)];
    let n2 = (cfg.n * cfg.n) as f64;
    let mut out = Vec::new();
    let (mut log_z, mut var) = (0.0, 0.0);
    for (k, (alpha, weight)) in gauss_legendre(nodes).into_iter().enumerate() {
        let scaled = cfg.potential.scaled_values(&Complex64::new(alpha, 0.0).to_exact());
        let c = MatrixEnsembleConfig {
            potential: scaled,
            seed: cfg.seed.wrapping_add(k as u64),
            ..cfg.clone()
        };
        let (report, _) = run(&c, &obs)?;
        let s = &report.stats[0];
        log_z -= n2 * weight * s.mean;
        var += (n2 * weight * s.std_error).powi(2);
        out.push(ThermoNode {
            alpha,
            weight,
            mean_trace_v: s.mean,
            std_error: s.std_error,
        });
    }
    let exact = cfg.potential.map_scalar::<GaussRational>();
    let reference = ThermoReference::new(&exact, series_order)?;
    let t = cfg.potential.coupling_values_c64()?;
    let (f0, f1) = reference.eval(&t);
    Ok(ThermoReport {
        n: cfg.n,
        nodes: out,
        log_z,
        log_z_std_error: var.sqrt(),
        series_order,
        f0: f0.re,
        f1: f1.re,
        series_log_z: reference.log_z(cfg.n, &t).re,
    })
}

/// Smallest second difference of `A ↦ Re Tr W(A)` along random unit
/// directions (`Σ_i Tr H_i² = 1`): an upper estimate of the least Hessian
/// eigenvalue at `A`.
pub fn convexity_probe<R: Rng + ?Sized>(mats: &[CMatrix], v: &FloatPolynomial, directions: usize, rng: &mut R) -> f64 {
    let n = mats[0].dim();
    let f = |a: &[CMatrix]| -> f64 {
        let quad: f64 = a.iter().map(CMatrix::frobenius_sq).sum();
        0.5 * quad + WordEvaluator::new(a).trace(v).re
    };
    let eps = 1e-3;
    let f0 = f(mats);
    let mut worst = f64::INFINITY;
    for _ in 0..directions {
        let mut h: Vec<CMatrix> = mats.iter().map(|_| gue_matrix(n, rng)).collect();
        let norm: f64 = h.iter().map(CMatrix::frobenius_sq).sum::<f64>().sqrt();
        for x in &mut h {
            *x = x.scale(1.0 / norm);
        }
        let shifted = |s: f64| -> Vec<CMatrix> {
            mats.iter()
                .zip(&h)
                .map(|(a, d)| {
                    let mut b = a.clone();
                    b.add_scaled(d, Complex64::new(s, 0.0));
                    b
                })
                .collect()
        };
        let curv = (f(&shifted(eps)) - 2.0 * f0 + f(&shifted(-eps))) / (eps * eps);
        worst = worst.min(curv);
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub threshold: f64,
    pub draws: usize,
    pub min_curvature: f64,
    pub warning: Option<String>,
}

/// Runs [`convexity_probe`] on `draws` sampled states; diagnostic only.
pub fn convexity_scan(
    cfg: &MatrixEnsembleConfig,
    draws: usize,
    directions: usize,
    c: f64,
) -> Result<ConvexityReport, McError> {
    let v = cfg.numeric_potential()?;
    let mut chain = Chain::new(cfg, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX - 1);
    let mut worst = f64::INFINITY;
    for _ in 0..draws {
        let mats = chain.next_draw()?.to_matrices(&mut rng);
        worst = worst.min(convexity_probe(&mats, &v, directions, &mut rng));
    }
    let warning = (worst < c).then(|| format!("estimated Hessian minimum {worst:.4} is below c = {c}"));
    Ok(ConvexityReport {
        threshold: c,
        draws,
        min_curvature: worst,
        warning,
    })
}
