use std::collections::HashMap;

use mmwb_core::{Complex64, Monomial, Polynomial};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// A square complex matrix stored as separate real and imaginary parts, so
/// products go through real GEMM.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            re: DMatrix::zeros(n, n),
            im: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        CMatrix {
            re: DMatrix::identity(n, n),
            im: DMatrix::zeros(n, n),
        }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut re = DMatrix::zeros(n, n);
        for (i, x) in d.iter().enumerate() {
            re[(i, i)] = *x;
        }
        CMatrix {
            re,
            im: DMatrix::zeros(n, n),
        }
    }

    pub fn from_complex(m: &DMatrix<Complex64>) -> Self {
        CMatrix {
            re: m.map(|z| z.re),
            im: m.map(|z| z.im),
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        self.re.zip_map(&self.im, Complex64::new)
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[(i, j)], self.im[(i, j)])
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let re = &self.re * &other.re - &self.im * &other.im;
        let im = &self.re * &other.im + &self.im * &other.re;
        CMatrix { re, im }
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix {
            re: self.re.transpose(),
            im: -self.im.transpose(),
        }
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix {
            re: &self.re * s,
            im: &self.im * s,
        }
    }

    pub fn add_scaled(&mut self, other: &CMatrix, c: Complex64) {
        self.re += &other.re * c.re - &other.im * c.im;
        self.im += &other.re * c.im + &other.im * c.re;
    }

    pub fn trace(&self) -> Complex64 {
        Complex64::new(self.re.trace(), self.im.trace())
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &CMatrix) -> Complex64 {
        let n = self.dim();
        let (mut re, mut im) = (0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                let (a, b) = (self.re[(i, j)], self.im[(i, j)]);
                let (c, d) = (other.re[(j, i)], other.im[(j, i)]);
                re += a * c - b * d;
                im += a * d + b * c;
            }
        }
        Complex64::new(re, im)
    }

    /// `(M + M*)/2`; exact bitwise Hermitian.
    pub fn hermitian_part(&self) -> CMatrix {
        let re = (&self.re + self.re.transpose()) * 0.5;
        let im = (&self.im - self.im.transpose()) * 0.5;
        CMatrix { re, im }
    }

    /// `max |M_ij − conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                let d = self.get(i, j) - self.get(j, i).conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// `Tr(M²)` for Hermitian `M`: the squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.re.norm_squared() + self.im.norm_squared()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .hermitian_part()
            .to_complex()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Operator norm of a Hermitian matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    /// A lower bound on the operator norm from a few power iterations, at
    /// `O(N²)` per iteration.
    pub fn norm_lower_bound(&self, iters: usize) -> f64 {
        let n = self.dim();
        let mut x = DVector::<f64>::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_749_895).fract());
        let mut y = DVector::<f64>::zeros(n);
        let mut est = 0.0;
        for _ in 0..iters {
            let norm = (x.norm_squared() + y.norm_squared()).sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            x /= norm;
            y /= norm;
            let nx = &self.re * &x - &self.im * &y;
            let ny = &self.re * &y + &self.im * &x;
            est = (nx.norm_squared() + ny.norm_squared()).sqrt();
            x = nx;
            y = ny;
        }
        est
    }
}

/// One GUE draw: diagonal `N(0, 1/N)`, off-diagonal real and imaginary parts
/// `N(0, 1/(2N))` each.
pub fn gue_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut m = CMatrix::zeros(n);
    let sd_diag = (1.0 / n as f64).sqrt();
    let sd_off = (0.5 / n as f64).sqrt();
    for j in 0..n {
        m.re[(j, j)] = sd_diag * rng.sample::<f64, _>(StandardNormal);
        for i in 0..j {
            let a = sd_off * rng.sample::<f64, _>(StandardNormal);
            let b = sd_off * rng.sample::<f64, _>(StandardNormal);
            m.re[(i, j)] = a;
            m.re[(j, i)] = a;
            m.im[(i, j)] = b;
            m.im[(j, i)] = -b;
        }
    }
    m
}

/// Haar-distributed unitary from the QR factorisation of a complex Ginibre
/// matrix, with the phases of `R`'s diagonal absorbed.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    CMatrix::from_complex(&q)
}

/// `U diag(λ) U*` with Haar `U`.
pub fn rotate_spectrum<R: Rng + ?Sized>(eigenvalues: &[f64], rng: &mut R) -> CMatrix {
    let u = haar_unitary(eigenvalues.len(), rng);
    u.mul(&CMatrix::from_real_diagonal(eigenvalues))
        .mul(&u.adjoint())
        .hermitian_part()
}

/// Evaluates words and polynomials at a fixed tuple of matrices, memoising
/// subword products (a word is split at its midpoint).
pub struct WordEvaluator<'a> {
    mats: &'a [CMatrix],
    cache: HashMap<Vec<u8>, CMatrix>,
}

impl<'a> WordEvaluator<'a> {
    pub fn new(mats: &'a [CMatrix]) -> Self {
        WordEvaluator {
            mats,
            cache: HashMap::new(),
        }
    }

    fn n(&self) -> usize {
        self.mats[0].dim()
    }

    fn ensure(&mut self, w: &[u8]) {
        if w.len() <= 1 || self.cache.contains_key(w) {
            return;
        }
        let h = w.len().div_ceil(2);
        self.ensure(&w[..h]);
        self.ensure(&w[h..]);
        let p = self.get(&w[..h]).mul(self.get(&w[h..]));
        self.cache.insert(w.to_vec(), p);
    }

    fn get(&self, w: &[u8]) -> &CMatrix {
        match w.len() {
            1 => &self.mats[w[0] as usize],
            _ => &self.cache[w],
        }
    }

    /// The matrix `w(A)`.
    pub fn product(&mut self, w: &Monomial) -> CMatrix {
        let l = w.letters();
        if l.is_empty() {
            return CMatrix::identity(self.n());
        }
        self.ensure(l);
        self.get(l).clone()
    }

    /// `Tr w(A)`, unnormalised.
    pub fn trace_word(&mut self, w: &Monomial) -> Complex64 {
        let l = w.letters();
        match l.len() {
            0 => Complex64::new(self.n() as f64, 0.0),
            1 => self.mats[l[0] as usize].trace(),
            _ => {
                let h = l.len().div_ceil(2);
                self.ensure(&l[..h]);
                self.ensure(&l[h..]);
                self.get(&l[..h]).trace_product(self.get(&l[h..]))
            }
        }
    }

    /// `Tr P(A)`, unnormalised.
    pub fn trace(&mut self, p: &Polynomial<Complex64>) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, c) in p.terms() {
            acc += c * self.trace_word(w);
        }
        acc
    }

    /// The matrix `P(A)`.
    pub fn eval(&mut self, p: &Polynomial<Complex64>) -> CMatrix {
        let mut acc = CMatrix::zeros(self.n());
        for (w, c) in p.terms() {
            let m = self.product(w);
            acc.add_scaled(&m, *c);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mmwb_core::ncpoly::parse_polynomial;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn split_product_matches_complex_product() {
        let mut r = rng();
        let a = gue_matrix(6, &mut r);
        let b = haar_unitary(6, &mut r);
        let direct = a.to_complex() * b.to_complex();
        let split = a.mul(&b).to_complex();
        assert!((direct - split).norm() < 1e-12);
        assert!((a.trace_product(&b) - a.mul(&b).trace()).norm() < 1e-12);
    }

    #[test]
    fn gue_is_hermitian_and_haar_is_unitary() {
        let mut r = rng();
        let a = gue_matrix(8, &mut r);
        assert_eq!(a.hermiticity_defect(), 0.0);
        let u = haar_unitary(8, &mut r);
        let id = u.mul(&u.adjoint()).to_complex();
        assert!((id - DMatrix::<Complex64>::identity(8, 8)).norm() < 1e-12);
    }

    #[test]
    fn rotation_keeps_spectrum() {
        let mut r = rng();
        let ev = [-1.5, -0.25, 0.5, 2.0];
        let m = rotate_spectrum(&ev, &mut r);
        assert_eq!(m.hermiticity_defect(), 0.0);
        for (a, b) in m.eigenvalues().iter().zip(ev) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn word_traces_match_naive_products() {
        let mut r = rng();
        let mats = vec![gue_matrix(5, &mut r), gue_matrix(5, &mut r)];
        let p = parse_polynomial::<Complex64>("x1^4 + 2*x1*x2*x1*x2 - x2^3 + 3").unwrap();
        let (a, b) = (mats[0].to_complex(), mats[1].to_complex());
        let naive = a.pow(4).trace() + (&a * &b * &a * &b).trace() * 2.0 - b.pow(3).trace() + Complex64::new(15.0, 0.0);
        let mut ev = WordEvaluator::new(&mats);
        assert!((ev.trace(&p) - naive).norm() < 1e-10);
        assert!((ev.eval(&p).trace() - naive).norm() < 1e-10);
    }
}
