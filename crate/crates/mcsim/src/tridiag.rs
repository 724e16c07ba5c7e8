//! The β = 2 tridiagonal model: a real symmetric tridiagonal matrix whose
//! eigenvalues have exactly the GUE joint law.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    /// Diagonal `N(0, 1/N)`, off-diagonal `χ_{2(N−k)} / √(2N)`.
    pub fn sample_gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let s = (1.0 / n as f64).sqrt();
        let diag = (0..n).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect();
        let off = (1..n)
            .map(|k| {
                let chi2 = ChiSquared::new(2.0 * (n - k) as f64).expect("positive degrees of freedom");
                (chi2.sample(rng) / (2.0 * n as f64)).sqrt()
            })
            .collect();
        Tridiagonal { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.dim() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            d = self.diag[i] - x - b2 / d;
            if d == 0.0 {
                d = -f64::EPSILON * (1.0 + x.abs());
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.eigenvalue(k)).collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalue(0).abs().max(self.eigenvalue(self.dim() - 1).abs())
    }

    /// Whether every eigenvalue lies in `(−l, l)`.
    pub fn within(&self, l: f64) -> bool {
        self.count_below(-l) == 0 && self.count_below(l) == self.dim() && !self.has_eigenvalue_at(-l)
    }

    fn has_eigenvalue_at(&self, x: f64) -> bool {
        self.count_below(x.next_up()) > self.count_below(x)
    }

    /// `Tr T^k` for `k = 0..=max_power`, by banded powers.
    pub fn power_traces(&self, max_power: usize) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![n as f64];
        if max_power == 0 {
            return out;
        }
        // band[d + w][i] holds (T^k)_{i, i+d} for |d| ≤ w = k.
        let mut w = 1usize;
        let mut band = vec![vec![0.0; n]; 3];
        for i in 0..n {
            band[1][i] = self.diag[i];
            if i + 1 < n {
                band[2][i] = self.off[i];
                band[0][i + 1] = self.off[i];
            }
        }
        out.push(self.diag.iter().sum());
        for _ in 2..=max_power {
            let nw = w + 1;
            let mut next = vec![vec![0.0; n]; 2 * nw + 1];
            for (idx, row) in band.iter().enumerate() {
                let d = idx as isize - w as isize;
                for (i, &v) in row.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let j = i as isize + d;
                    // (T^k T)_{i, j'} = Σ_j (T^k)_{i j} T_{j j'} with j' ∈ {j−1, j, j+1}.
                    let j = j as usize;
                    next[(d + nw as isize) as usize][i] += v * self.diag[j];
                    if j + 1 < n {
                        next[(d + 1 + nw as isize) as usize][i] += v * self.off[j];
                    }
                    if j > 0 {
                        next[(d - 1 + nw as isize) as usize][i] += v * self.off[j - 1];
                    }
                }
            }
            band = next;
            w = nw;
            out.push(band[w].iter().sum());
        }
        out
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sturm_and_bisection_match_dense_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = Tridiagonal::sample_gue(12, &mut rng);
        let mut dense: Vec<f64> = t.to_dense().symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        for (a, b) in t.eigenvalues().iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let r = dense[0].abs().max(dense[11].abs());
        assert!(t.within(r + 1e-9));
        assert!(!t.within(r - 1e-9));
    }

    #[test]
    fn power_traces_match_dense_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = Tridiagonal::sample_gue(9, &mut rng);
        let d = t.to_dense();
        let tr = t.power_traces(8);
        let mut p = nalgebra::DMatrix::<f64>::identity(9, 9);
        for (k, x) in tr.iter().enumerate() {
            assert!((p.trace() - x).abs() < 1e-10, "k = {k}");
            p = &p * &d;
        }
    }

    #[test]
    fn normalisation() {
        // E Tr T² = N, so (1/N) Tr T² averages to 1.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 40;
        let reps = 400;
        let mean: f64 = (0..reps)
            .map(|_| Tridiagonal::sample_gue(n, &mut rng).power_traces(2)[2] / n as f64)
            .sum::<f64>()
            / reps as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }
}
