use mmwb_core::{Complex64, FloatPolynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::config::{eval_real_poly, MatrixEnsembleConfig, SamplerKind};
use crate::matrix::{gue_matrix, rotate_spectrum, CMatrix, WordEvaluator};
use crate::tridiag::Tridiagonal;
use crate::McError;

/// Proposals inspected before a rejection sampler may declare collapse.
const COLLAPSE_WINDOW: u64 = 1000;
const NORM_ITERS: usize = 30;

/// One emitted state.
#[derive(Clone, Debug, PartialEq)]
pub enum Draw {
    Matrices(Vec<CMatrix>),
    /// A single matrix known up to unitary conjugation.
    Tridiagonal(Tridiagonal),
    Spectrum(Vec<f64>),
}

impl Draw {
    pub fn n(&self) -> usize {
        match self {
            Draw::Matrices(m) => m[0].dim(),
            Draw::Tridiagonal(t) => t.dim(),
            Draw::Spectrum(l) => l.len(),
        }
    }

    pub fn matrix_count(&self) -> usize {
        match self {
            Draw::Matrices(m) => m.len(),
            _ => 1,
        }
    }

    /// Unnormalised `Tr P(A)` for each `P`.
    pub fn traces(&self, ps: &[FloatPolynomial]) -> Result<Vec<Complex64>, McError> {
        let m = self.matrix_count();
        for p in ps {
            if p.colors_used() > m {
                return Err(McError::InvalidConfig(format!(
                    "observable {p} needs {} matrices, the ensemble has {m}",
                    p.colors_used()
                )));
            }
        }
        match self {
            Draw::Matrices(mats) => {
                let mut ev = WordEvaluator::new(mats);
                Ok(ps.iter().map(|p| ev.trace(p)).collect())
            }
            Draw::Tridiagonal(t) => {
                let sums = t.power_traces(max_degree(ps));
                Ok(ps.iter().map(|p| power_sum_trace(p, &sums)).collect())
            }
            Draw::Spectrum(l) => {
                let d = max_degree(ps);
                let mut sums = vec![0.0; d + 1];
                for &x in l {
                    let mut pw = 1.0;
                    for s in sums.iter_mut() {
                        *s += pw;
                        pw *= x;
                    }
                }
                Ok(ps.iter().map(|p| power_sum_trace(p, &sums)).collect())
            }
        }
    }

    /// Largest eigenvalue over all matrices.
    pub fn lambda_max(&self) -> f64 {
        match self {
            Draw::Matrices(mats) => mats
                .iter()
                .map(|a| *a.eigenvalues().last().expect("nonempty"))
                .fold(f64::NEG_INFINITY, f64::max),
            Draw::Tridiagonal(t) => t.eigenvalue(t.dim() - 1),
            Draw::Spectrum(l) => l.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Largest operator norm over all matrices.
    pub fn operator_norm(&self) -> f64 {
        match self {
            Draw::Matrices(mats) => mats.iter().map(CMatrix::spectral_radius).fold(0.0, f64::max),
            Draw::Tridiagonal(t) => t.spectral_radius(),
            Draw::Spectrum(l) => l.iter().fold(0.0f64, |a, x| a.max(x.abs())),
        }
    }

    fn norm_lower_bound(&self) -> f64 {
        match self {
            Draw::Matrices(mats) => mats.iter().map(|a| a.norm_lower_bound(NORM_ITERS)).fold(0.0, f64::max),
            _ => self.operator_norm(),
        }
    }

    /// Full Hermitian matrices; spectral draws are conjugated by a Haar
    /// unitary, which gives them the unitarily invariant law of the ensemble.
    pub fn to_matrices<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<CMatrix> {
        match self {
            Draw::Matrices(m) => m.clone(),
            Draw::Tridiagonal(t) => vec![rotate_spectrum(&t.eigenvalues(), rng)],
            Draw::Spectrum(l) => vec![rotate_spectrum(l, rng)],
        }
    }
}

fn max_degree(ps: &[FloatPolynomial]) -> usize {
    ps.iter().map(FloatPolynomial::degree).max().unwrap_or(0)
}

fn power_sum_trace(p: &FloatPolynomial, sums: &[f64]) -> Complex64 {
    p.terms().map(|(w, c)| c * sums[w.degree()]).sum()
}

/// A proposal pair logged for the detailed-balance audit. Log-densities are
/// recomputed from scratch, independently of the incremental formula the
/// chain used to decide.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRecord {
    pub log_target_current: f64,
    pub log_target_proposed: f64,
    /// `log q(proposed | current)`; zero for symmetric proposals.
    pub log_q_forward: f64,
    pub log_q_reverse: f64,
    /// Acceptance probability the chain applied.
    pub acceptance: f64,
}

enum State {
    Exact,
    Spectral {
        lambda: Vec<f64>,
        w: Vec<f64>,
    },
    Matrix {
        mats: Vec<CMatrix>,
        v: FloatPolynomial,
        grad: Vec<FloatPolynomial>,
        energy: f64,
        force: Vec<CMatrix>,
    },
}

/// A single, strictly sequential chain (or i.i.d. stream for exact draws).
pub struct Chain {
    cfg: MatrixEnsembleConfig,
    rng: ChaCha8Rng,
    state: State,
    proposed: u64,
    accepted: u64,
    burned_in: bool,
    warned_escape: bool,
    warnings: Vec<String>,
    audit: Option<Vec<AuditRecord>>,
}

impl Chain {
    /// Chain `index` draws from stream `index` of the ChaCha generator keyed
    /// by the configured seed.
    pub fn new(cfg: &MatrixEnsembleConfig, index: u64) -> Result<Self, McError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index);
        let n = cfg.n;
        let state = match (cfg.sampler, cfg.spectral()) {
            (SamplerKind::ExactGue, _) => State::Exact,
            (_, true) => {
                let mut lambda = Tridiagonal::sample_gue(n, &mut rng).eigenvalues();
                if let Some(l) = cfg.cutoff {
                    shrink_into(&mut lambda, l);
                }
                State::Spectral {
                    lambda,
                    w: cfg.univariate_w()?,
                }
            }
            (_, false) => {
                let mut mats: Vec<CMatrix> = (0..cfg.m).map(|_| gue_matrix(n, &mut rng)).collect();
                if let Some(l) = cfg.cutoff {
                    for a in &mut mats {
                        let r = a.spectral_radius();
                        if r >= l {
                            *a = a.scale(0.9 * l / r);
                        }
                    }
                }
                let v = cfg.numeric_potential()?;
                let mut grad = cfg.potential.numeric_gradient()?;
                grad.resize(cfg.m, FloatPolynomial::zero());
                let (energy, force) = energy_and_force(&mats, &v, &grad, cfg.sampler == SamplerKind::Langevin);
                State::Matrix {
                    mats,
                    v,
                    grad,
                    energy,
                    force,
                }
            }
        };
        Ok(Chain {
            cfg: cfg.clone(),
            rng,
            state,
            proposed: 0,
            accepted: 0,
            burned_in: false,
            warned_escape: false,
            warnings: Vec::new(),
            audit: None,
        })
    }

    /// Starts logging proposal pairs for [`detailed_balance_defect`].
    pub fn enable_audit(&mut self) {
        self.audit = Some(Vec::new());
    }

    pub fn take_audit(&mut self) -> Vec<AuditRecord> {
        self.audit.take().unwrap_or_default()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Fraction of accepted proposals so far, if any were made.
    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }

    pub fn next_draw(&mut self) -> Result<Draw, McError> {
        let draw = match self.state {
            State::Exact => self.exact_draw()?,
            _ => {
                if !self.burned_in {
                    self.burn_in()?;
                }
                for _ in 0..self.cfg.thinning {
                    self.sweep();
                }
                self.current()
            }
        };
        if self.cfg.cutoff.is_none() && !self.warned_escape {
            let r = draw.norm_lower_bound();
            if r > self.cfg.spectral_guard {
                self.warned_escape = true;
                self.warnings.push(format!(
                    "SpectralEscape: operator norm {r:.3} exceeds the guard {} without a cutoff",
                    self.cfg.spectral_guard
                ));
            }
        }
        Ok(draw)
    }

    fn burn_in(&mut self) -> Result<(), McError> {
        for _ in 0..self.cfg.burn_in {
            self.sweep();
        }
        self.burned_in = true;
        if let Some(rate) = self.acceptance_rate() {
            if rate < 0.01 {
                return Err(McError::AcceptanceCollapse {
                    rate,
                    proposals: self.proposed,
                });
            }
        }
        self.proposed = 0;
        self.accepted = 0;
        Ok(())
    }

    fn current(&self) -> Draw {
        match &self.state {
            State::Spectral { lambda, .. } => Draw::Spectrum(lambda.clone()),
            State::Matrix { mats, .. } => Draw::Matrices(mats.clone()),
            State::Exact => unreachable!("exact draws are not stateful"),
        }
    }

    fn exact_draw(&mut self) -> Result<Draw, McError> {
        let (n, m) = (self.cfg.n, self.cfg.m);
        loop {
            let draw = if self.cfg.spectral() {
                Draw::Tridiagonal(Tridiagonal::sample_gue(n, &mut self.rng))
            } else {
                Draw::Matrices((0..m).map(|_| gue_matrix(n, &mut self.rng)).collect())
            };
            let Some(l) = self.cfg.cutoff else {
                return Ok(draw);
            };
            self.proposed += 1;
            let inside = match &draw {
                Draw::Tridiagonal(t) => t.within(l),
                d => d.operator_norm() < l,
            };
            if inside {
                self.accepted += 1;
                return Ok(draw);
            }
            if self.proposed >= COLLAPSE_WINDOW && (self.accepted as f64) < 0.01 * self.proposed as f64 {
                return Err(McError::AcceptanceCollapse {
                    rate: self.accepted as f64 / self.proposed as f64,
                    proposals: self.proposed,
                });
            }
        }
    }

    /// One sweep: `N` single-eigenvalue moves, one move per matrix, or one
    /// joint Langevin move.
    pub fn sweep(&mut self) {
        match self.state {
            State::Exact => {}
            State::Spectral { .. } => self.spectral_sweep(),
            State::Matrix { .. } => match self.cfg.sampler {
                SamplerKind::Langevin => self.langevin_step(),
                _ => self.metropolis_sweep(),
            },
        }
    }

    fn spectral_sweep(&mut self) {
        let State::Spectral { lambda, w } = &mut self.state else {
            return;
        };
        let n = lambda.len();
        let nf = n as f64;
        let scale = self.cfg.step / nf.sqrt();
        for i in 0..n {
            let x = lambda[i];
            let y = x + scale * self.rng.sample::<f64, _>(StandardNormal);
            self.proposed += 1;
            if self.cfg.cutoff.is_some_and(|l| y.abs() >= l) {
                continue;
            }
            let log_r = -nf * (eval_real_poly(w, y) - eval_real_poly(w, x)) + 2.0 * log_vandermonde_ratio(lambda, i, y);
            let a = acceptance(log_r);
            if let Some(log) = &mut self.audit {
                let before = coulomb_log_density(lambda, w);
                let mut moved = lambda.clone();
                moved[i] = y;
                log.push(AuditRecord {
                    log_target_current: before,
                    log_target_proposed: coulomb_log_density(&moved, w),
                    log_q_forward: 0.0,
                    log_q_reverse: 0.0,
                    acceptance: a,
                });
            }
            if self.rng.gen::<f64>() < a {
                lambda[i] = y;
                self.accepted += 1;
            }
        }
    }

    fn metropolis_sweep(&mut self) {
        let n = self.cfg.n;
        let step = self.cfg.step;
        let State::Matrix {
            mats, v, grad, energy, ..
        } = &mut self.state
        else {
            return;
        };
        for i in 0..mats.len() {
            self.proposed += 1;
            let g = gue_matrix(n, &mut self.rng);
            let mut prop = mats[i].clone();
            prop.add_scaled(&g, Complex64::new(step, 0.0));
            if self.cfg.cutoff.is_some_and(|l| prop.spectral_radius() >= l) {
                continue;
            }
            let old = std::mem::replace(&mut mats[i], prop);
            let (e, _) = energy_and_force(mats, v, grad, false);
            let a = acceptance(*energy - e);
            if let Some(log) = &mut self.audit {
                log.push(AuditRecord {
                    log_target_current: -*energy,
                    log_target_proposed: -e,
                    log_q_forward: 0.0,
                    log_q_reverse: 0.0,
                    acceptance: a,
                });
            }
            if self.rng.gen::<f64>() < a {
                *energy = e;
                self.accepted += 1;
            } else {
                mats[i] = old;
            }
        }
    }

    fn langevin_step(&mut self) {
        let n = self.cfg.n;
        let h = self.cfg.step;
        let nf = n as f64;
        let State::Matrix {
            mats,
            v,
            grad,
            energy,
            force,
        } = &mut self.state
        else {
            return;
        };
        self.proposed += 1;
        let mut prop = Vec::with_capacity(mats.len());
        let mut log_q_forward = 0.0;
        for (a, f) in mats.iter().zip(force.iter()) {
            let z = gue_matrix(n, &mut self.rng);
            log_q_forward -= 0.5 * nf * z.frobenius_sq();
            let mut b = a.clone();
            b.add_scaled(f, Complex64::new(-0.5 * h, 0.0));
            b.add_scaled(&z, Complex64::new(h.sqrt(), 0.0));
            prop.push(b.hermitian_part());
        }
        if let Some(l) = self.cfg.cutoff {
            if prop.iter().any(|b| b.spectral_radius() >= l) {
                return;
            }
        }
        let (e, f_new) = energy_and_force(&prop, v, grad, true);
        let mut log_q_reverse = 0.0;
        for ((a, b), fb) in mats.iter().zip(&prop).zip(&f_new) {
            let mut d = a.clone();
            d.add_scaled(b, Complex64::new(-1.0, 0.0));
            d.add_scaled(fb, Complex64::new(0.5 * h, 0.0));
            log_q_reverse -= nf / (2.0 * h) * d.frobenius_sq();
        }
        let a = acceptance(*energy - e + log_q_reverse - log_q_forward);
        if let Some(log) = &mut self.audit {
            log.push(AuditRecord {
                log_target_current: -*energy,
                log_target_proposed: -e,
                log_q_forward,
                log_q_reverse,
                acceptance: a,
            });
        }
        if self.rng.gen::<f64>() < a {
            *mats = prop;
            *energy = e;
            *force = f_new;
            self.accepted += 1;
        }
    }
}

fn acceptance(log_r: f64) -> f64 {
    if log_r >= 0.0 {
        1.0
    } else if log_r.is_nan() {
        0.0
    } else {
        log_r.exp()
    }
}

fn shrink_into(lambda: &mut [f64], l: f64) {
    let r = lambda.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if r >= l {
        for x in lambda.iter_mut() {
            *x *= 0.9 * l / r;
        }
    }
}

/// `Σ_{j≠i} log |y − λ_j| / |λ_i − λ_j|`, multiplying ratios and taking
/// logarithms only when the running product leaves a safe range.
fn log_vandermonde_ratio(lambda: &[f64], i: usize, y: f64) -> f64 {
    let x = lambda[i];
    let mut acc = 0.0;
    let mut prod = 1.0f64;
    for (j, &l) in lambda.iter().enumerate() {
        if j == i {
            continue;
        }
        prod *= ((y - l) / (x - l)).abs();
        if !(1e-150..=1e150).contains(&prod) {
            acc += prod.ln();
            prod = 1.0;
        }
    }
    acc + prod.ln()
}

/// `Σ_{i<j} 2 log|λ_i − λ_j| − N Σ_i W(λ_i)`.
pub fn coulomb_log_density(lambda: &[f64], w: &[f64]) -> f64 {
    let n = lambda.len() as f64;
    let mut s = 0.0;
    for (i, &a) in lambda.iter().enumerate() {
        s -= n * eval_real_poly(w, a);
        for &b in &lambda[i + 1..] {
            s += 2.0 * (a - b).abs().ln();
        }
    }
    s
}

/// `N Tr W(A)` with `W = V + ½ Σ X_i²`, and optionally `A_i + D_i V(A)`.
pub fn energy_and_force(
    mats: &[CMatrix],
    v: &FloatPolynomial,
    grad: &[FloatPolynomial],
    with_force: bool,
) -> (f64, Vec<CMatrix>) {
    let n = mats[0].dim() as f64;
    let mut ev = WordEvaluator::new(mats);
    let quad: f64 = mats.iter().map(CMatrix::frobenius_sq).sum();
    let e = n * (0.5 * quad + ev.trace(v).re);
    if !with_force {
        return (e, Vec::new());
    }
    let force = mats
        .iter()
        .zip(grad)
        .map(|(a, g)| {
            let mut f = ev.eval(g).hermitian_part();
            f.add_scaled(a, Complex64::new(1.0, 0.0));
            f
        })
        .collect();
    (e, force)
}

/// Largest violation of `π(A) a(A→B) q(B|A) = π(B) a(B→A) q(A|B)` in log
/// space, with `a(B→A)` rebuilt from the recomputed densities.
pub fn detailed_balance_defect(records: &[AuditRecord]) -> f64 {
    records
        .iter()
        .filter(|r| r.acceptance > 0.0)
        .map(|r| {
            let fwd = r.log_target_current + r.log_q_forward;
            let rev = r.log_target_proposed + r.log_q_reverse;
            let back = acceptance(fwd - rev);
            let lhs = fwd + r.acceptance.ln();
            let rhs = rev + back.ln();
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Everything one chain produced.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainOutput {
    pub rows: Vec<Vec<f64>>,
    pub acceptance: Option<f64>,
    pub warnings: Vec<String>,
}

/// Runs `cfg.chains` independent chains concurrently, splitting
/// `cfg.samples` between them, and maps every draw through `row`. Outputs
/// are ordered by chain index, so results do not depend on scheduling.
pub fn collect_rows<F>(cfg: &MatrixEnsembleConfig, row: F) -> Result<Vec<ChainOutput>, McError>
where
    F: Fn(&Draw) -> Result<Vec<f64>, McError> + Sync,
{
    cfg.validate()?;
    let k = cfg.chains;
    let run = |index: usize| -> Result<ChainOutput, McError> {
        let count = cfg.samples / k + usize::from(index < cfg.samples % k);
        let mut chain = Chain::new(cfg, index as u64)?;
        let mut rows = Vec::with_capacity(count);
        for _ in 0..count {
            let d = chain.next_draw()?;
            rows.push(row(&d)?);
        }
        Ok(ChainOutput {
            rows,
            acceptance: chain.acceptance_rate(),
            warnings: chain.warnings().to_vec(),
        })
    };
    if k == 1 {
        return Ok(vec![run(0)?]);
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..k).map(|i| s.spawn(move || run(i))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    })
}

/// An i.i.d. stream of GUE `m`-tuples.
pub fn sample_gue(n: usize, m: usize, seed: u64) -> impl Iterator<Item = Vec<CMatrix>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::iter::repeat_with(move || (0..m).map(|_| gue_matrix(n, &mut rng)).collect())
}

/// A stream of Hermitian `m`-tuples from the configured Gibbs measure.
pub fn sample_gibbs(
    cfg: &MatrixEnsembleConfig,
) -> Result<impl Iterator<Item = Result<Vec<CMatrix>, McError>>, McError> {
    let mut chain = Chain::new(cfg, 0)?;
    let mut rot = ChaCha8Rng::seed_from_u64(cfg.seed);
    rot.set_stream(u64::MAX);
    Ok(std::iter::repeat_with(move || {
        chain.next_draw().map(|d| d.to_matrices(&mut rot))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Representation;
    use mmwb_core::ncpoly::parse_potential;

    fn gibbs(v: &str, m: usize, sampler: SamplerKind, n: usize) -> MatrixEnsembleConfig {
        let mut c = MatrixEnsembleConfig::gibbs(n, parse_potential(v, m).unwrap(), sampler, 20, 11);
        c.m = m;
        c.burn_in = 20;
        c.step = match sampler {
            SamplerKind::Langevin => 0.05,
            _ => 0.5,
        };
        c
    }

    #[test]
    fn vandermonde_ratio_matches_direct_sum() {
        let l: [f64; 5] = [-1.3, -0.2, 0.4, 0.9, 2.2];
        let direct: f64 = l
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != 2)
            .map(|(_, x)| ((0.55 - x) / (0.4 - x)).abs().ln())
            .sum();
        assert!((log_vandermonde_ratio(&l, 2, 0.55) - direct).abs() < 1e-14);
        let w = [0.0, 0.0, 0.5];
        let mut moved = l;
        moved[2] = 0.55;
        let diff = coulomb_log_density(&moved, &w) - coulomb_log_density(&l, &w);
        let inc = -5.0 * (0.5 * 0.55f64.powi(2) - 0.5 * 0.4f64.powi(2)) + 2.0 * direct;
        assert!((diff - inc).abs() < 1e-12);
    }

    #[test]
    fn emitted_matrices_are_exactly_hermitian() {
        for (v, m, s) in [
            ("0.05*x1^4 + 0.05*x2^4 + 0.1*x1*x2", 2, SamplerKind::Metropolis),
            ("0.05*x1^4 + 0.05*x2^4 + 0.1*x1*x2", 2, SamplerKind::Langevin),
            ("0.05*x1^4", 1, SamplerKind::Metropolis),
        ] {
            let cfg = gibbs(v, m, s, 6);
            for mats in sample_gibbs(&cfg).unwrap().take(5) {
                for a in mats.unwrap() {
                    assert_eq!(a.hermiticity_defect(), 0.0, "{s}");
                }
            }
        }
        for mats in sample_gue(7, 2, 1).take(3) {
            assert!(mats.iter().all(|a| a.hermiticity_defect() == 0.0));
        }
    }

    #[test]
    fn streams_are_reproducible() {
        for s in [SamplerKind::Metropolis, SamplerKind::Langevin] {
            let cfg = gibbs("0.05*x1^4 + 0.1*x1*x2 + 0.05*x2^4", 2, s, 5);
            let a: Vec<Draw> = (0..3)
                .map({
                    let mut c = Chain::new(&cfg, 0).unwrap();
                    move |_| c.next_draw().unwrap()
                })
                .collect();
            let b: Vec<Draw> = (0..3)
                .map({
                    let mut c = Chain::new(&cfg, 0).unwrap();
                    move |_| c.next_draw().unwrap()
                })
                .collect();
            let other = Chain::new(&cfg, 1).unwrap().next_draw().unwrap();
            assert_eq!(a, b);
            assert_ne!(a[0], other);
        }
    }

    #[test]
    fn acceptance_obeys_detailed_balance() {
        for (v, m, s, n) in [
            ("0.05*x1^4 - 0.1*x1^3", 1, SamplerKind::Metropolis, 12),
            ("0.05*x1^4 + 0.1*x1*x2 + 0.05*x2^4", 2, SamplerKind::Metropolis, 5),
            ("0.05*x1^4 + 0.1*x1*x2 + 0.05*x2^4", 2, SamplerKind::Langevin, 5),
        ] {
            let cfg = gibbs(v, m, s, n);
            let mut chain = Chain::new(&cfg, 0).unwrap();
            chain.enable_audit();
            for _ in 0..30 {
                chain.sweep();
            }
            let log = chain.take_audit();
            assert!(log.len() >= 30);
            assert!(log.iter().any(|r| r.acceptance < 1.0), "{s}: no rejection exercised");
            let defect = detailed_balance_defect(&log);
            assert!(defect < 1e-9, "{s}: {defect}");
        }
    }

    #[test]
    fn audit_catches_a_wrong_rule() {
        let r = AuditRecord {
            log_target_current: 0.0,
            log_target_proposed: -1.0,
            log_q_forward: 0.0,
            log_q_reverse: 0.0,
            acceptance: 0.9,
        };
        assert!(detailed_balance_defect(&[r]) > 0.5);
    }

    #[test]
    fn cutoff_holds_for_every_sampler() {
        for (v, m, s) in [
            ("0", 1, SamplerKind::ExactGue),
            ("0.05*x1^4", 1, SamplerKind::Metropolis),
            ("0.05*x1^4 + 0.05*x2^4", 2, SamplerKind::Metropolis),
            ("0.05*x1^4 + 0.05*x2^4", 2, SamplerKind::Langevin),
        ] {
            let mut cfg = if s == SamplerKind::ExactGue {
                MatrixEnsembleConfig::gue(8, m, 20, 2)
            } else {
                gibbs(v, m, s, 8)
            };
            cfg.cutoff = Some(1.8);
            let mut chain = Chain::new(&cfg, 0).unwrap();
            for _ in 0..20 {
                assert!(chain.next_draw().unwrap().operator_norm() < 1.8, "{s}");
            }
        }
    }

    #[test]
    fn spectral_exact_draws_respect_cutoff() {
        let mut cfg = MatrixEnsembleConfig::gue(30, 1, 1, 3);
        cfg.representation = Representation::Spectral;
        cfg.cutoff = Some(2.0);
        let mut chain = Chain::new(&cfg, 0).unwrap();
        for _ in 0..50 {
            let d = chain.next_draw().unwrap();
            assert!(matches!(d, Draw::Tridiagonal(_)));
            assert!(d.operator_norm() < 2.0);
        }
        assert!(chain.acceptance_rate().unwrap() < 1.0);
    }

    #[test]
    fn collapse_is_reported() {
        let mut cfg = gibbs("0.05*x1^4", 1, SamplerKind::Metropolis, 40);
        cfg.step = 500.0;
        let err = Chain::new(&cfg, 0).unwrap().next_draw().unwrap_err();
        assert!(matches!(err, McError::AcceptanceCollapse { .. }), "{err}");
        let mut cfg = MatrixEnsembleConfig::gue(20, 1, 1, 3);
        cfg.cutoff = Some(0.5);
        let err = Chain::new(&cfg, 0).unwrap().next_draw().unwrap_err();
        assert!(matches!(err, McError::AcceptanceCollapse { .. }), "{err}");
    }

    #[test]
    fn escape_is_warned() {
        let mut cfg = MatrixEnsembleConfig::gue(10, 1, 1, 3);
        cfg.spectral_guard = 0.5;
        let mut chain = Chain::new(&cfg, 0).unwrap();
        chain.next_draw().unwrap();
        chain.next_draw().unwrap();
        assert_eq!(chain.warnings().len(), 1);
        assert!(chain.warnings()[0].starts_with("SpectralEscape"));
    }

    #[test]
    fn spectral_and_matrix_traces_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = Tridiagonal::sample_gue(7, &mut rng);
        let ps = vec![
            mmwb_core::ncpoly::parse_polynomial::<Complex64>("x1^3 - 2*x1^2 + 1").unwrap(),
            mmwb_core::ncpoly::parse_polynomial::<Complex64>("x1^6").unwrap(),
        ];
        let a = Draw::Tridiagonal(t.clone()).traces(&ps).unwrap();
        let b = Draw::Spectrum(t.eigenvalues()).traces(&ps).unwrap();
        let c = Draw::Matrices(Draw::Tridiagonal(t).to_matrices(&mut rng))
            .traces(&ps)
            .unwrap();
        for k in 0..2 {
            assert!((a[k] - b[k]).norm() < 1e-10 && (a[k] - c[k]).norm() < 1e-9);
        }
        let two = mmwb_core::ncpoly::parse_polynomial::<Complex64>("x1*x2").unwrap();
        assert!(Draw::Spectrum(vec![0.0, 1.0]).traces(&[two]).is_err());
    }
}
