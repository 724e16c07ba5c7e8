use serde::{Deserialize, Serialize};

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub ess: f64,
}

impl SampleStats {
    pub fn new(label: impl Into<String>, xs: &[f64]) -> Self {
        Self::from_chains(label, &[xs])
    }

    /// Pools chains; the effective sample size is the sum of per-chain
    /// autocorrelation-adjusted sizes.
    pub fn from_chains(label: impl Into<String>, chains: &[&[f64]]) -> Self {
        let all: Vec<f64> = chains.iter().flat_map(|c| c.iter().copied()).collect();
        let n = all.len();
        let mean = mean(&all);
        let variance = variance(&all);
        let ess: f64 = chains
            .iter()
            .filter(|c| !c.is_empty())
            .map(|c| effective_sample_size(c))
            .sum();
        let std_error = if ess > 0.0 { (variance / ess).sqrt() } else { f64::NAN };
        SampleStats {
            label: label.into(),
            n,
            mean,
            variance,
            std_error,
            ess,
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

fn autocovariance(xs: &[f64], m: f64, lag: usize) -> f64 {
    let n = xs.len();
    xs[..n - lag]
        .iter()
        .zip(&xs[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum::<f64>()
        / n as f64
}

/// Geyer's initial monotone sequence estimate of `n / τ_int`, capped at `n`.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(xs);
    let g0 = autocovariance(xs, m, 0);
    if g0 <= 0.0 {
        return n as f64;
    }
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n / 2 {
        let pair = autocovariance(xs, m, 2 * k) + autocovariance(xs, m, 2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        k += 1;
    }
    let tau = (2.0 * sum / g0 - 1.0).max(1e-12);
    (n as f64 / tau).min(n as f64)
}

/// Sample skewness and excess kurtosis (moment estimators).
pub fn shape(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Variance estimate with a distribution-free standard error: the variance
/// of the squared deviations, over their effective sample size.
pub fn variance_with_error(xs: &[f64]) -> (f64, f64) {
    let s2 = variance(xs);
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
    let se = (variance(&sq) / effective_sample_size(&sq)).sqrt();
    (s2, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn iid_ess_is_close_to_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.sample(StandardNormal)).collect();
        let ess = effective_sample_size(&xs);
        assert!(ess > 17_000.0, "{ess}");
        let (s, k) = shape(&xs);
        assert!(s.abs() < 0.06 && k.abs() < 0.12);
    }

    #[test]
    fn ar1_ess_matches_theory() {
        // τ = (1 + ρ)/(1 − ρ) = 9 for ρ = 0.8.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho: f64 = 0.8;
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = rho * x + (1.0 - rho * rho).sqrt() * rng.sample::<f64, _>(StandardNormal);
                x
            })
            .collect();
        let tau = xs.len() as f64 / effective_sample_size(&xs);
        assert!((tau - 9.0).abs() < 0.8, "{tau}");
    }

    #[test]
    fn pooled_chains() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [5.0, 6.0, 7.0, 8.0];
        let s = SampleStats::from_chains("x", &[&a, &b]);
        assert_eq!(s.n, 8);
        assert_eq!(s.mean, 4.5);
        assert_eq!(s.variance, 6.0);
    }

    proptest! {
        #[test]
        fn ess_is_within_bounds(xs in proptest::collection::vec(-10.0f64..10.0, 4..200)) {
            let e = effective_sample_size(&xs);
            prop_assert!(e > 0.0 && e <= xs.len() as f64);
        }

        #[test]
        fn variance_is_shift_invariant(xs in proptest::collection::vec(-10.0f64..10.0, 2..50), c in -100.0f64..100.0) {
            let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
            prop_assert!((variance(&xs) - variance(&shifted)).abs() < 1e-8 * (1.0 + variance(&xs)));
        }
    }
}
