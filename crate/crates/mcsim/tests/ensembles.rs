use mmwb_core::mapcount::DEFAULT_HALF_EDGE_CAP;
use mmwb_core::ncpoly::parse_potential;
use mmwb_core::sdsolve::wick_finite_n;
use mmwb_core::{Color, Monomial};
use mmwb_mc::{
    convexity_scan, fluctuation_test, read_trace, run, tail_test, thermo_integration, write_trace,
    MatrixEnsembleConfig, Observable, Representation, SampleStats, SamplerKind,
};

fn obs(s: &str) -> Vec<Observable> {
    Observable::parse_list(s).unwrap()
}

fn wick(k: usize, n: usize) -> f64 {
    wick_finite_n(&Monomial::power(Color::from_index(0), k), DEFAULT_HALF_EDGE_CAP)
        .unwrap()
        .eval(n as f64)
}

fn assert_close(s: &SampleStats, target: f64, k: f64, slack: f64) {
    let err = (s.mean - target).abs();
    assert!(
        err <= k * s.std_error + slack,
        "{}: mean {} vs {target}, |err| = {err:.3e}, stderr {:.3e}",
        s.label,
        s.mean,
        s.std_error
    );
}

#[test]
fn gue_low_moments_at_n100() {
    let cfg = MatrixEnsembleConfig::gue(100, 1, 10_000, 1);
    let (r, _) = run(&cfg, &obs("x1^2,x1^3,x1^4")).unwrap();
    assert_close(&r.stats[0], 1.0, 3.0, 0.0);
    assert_close(&r.stats[1], 0.0, 3.0, 0.0);
    assert_close(&r.stats[2], 2.0 + 1.0 / 100f64.powi(2), 3.0, 0.0);
    assert!(r.warnings.is_empty());
}

#[test]
fn gue_even_moments_match_wick_at_small_n() {
    for n in [4usize, 9] {
        let cfg = MatrixEnsembleConfig::gue(n, 1, 20_000, 2);
        let (r, _) = run(&cfg, &obs("x1^2,x1^4,x1^6,x1^8")).unwrap();
        for (k, s) in r.stats.iter().enumerate() {
            assert_close(s, wick(2 * (k + 1), n), 4.0, 0.0);
        }
    }
}

#[test]
fn tridiagonal_model_matches_wick() {
    let mut cfg = MatrixEnsembleConfig::gue(6, 1, 40_000, 3);
    cfg.representation = Representation::Spectral;
    let (r, _) = run(&cfg, &obs("x1^2,x1^4,x1^6,x1^8")).unwrap();
    for (k, s) in r.stats.iter().enumerate() {
        assert_close(s, wick(2 * (k + 1), 6), 4.0, 0.0);
    }
}

#[test]
fn metropolis_at_v0_matches_the_gaussian_law() {
    // Coulomb gas for one matrix, full-matrix moves for a pair.
    let mut cfg = MatrixEnsembleConfig::gibbs(8, parse_potential("0", 1).unwrap(), SamplerKind::Metropolis, 6000, 4);
    cfg.m = 1;
    cfg.step = 1.5;
    cfg.thinning = 10;
    let (r, _) = run(&cfg, &obs("x1^2,x1^4")).unwrap();
    assert_close(&r.stats[0], wick(2, 8), 4.0, 0.0);
    assert_close(&r.stats[1], wick(4, 8), 4.0, 0.0);

    let mut cfg = MatrixEnsembleConfig::gibbs(5, parse_potential("0", 2).unwrap(), SamplerKind::Metropolis, 4000, 5);
    cfg.m = 2;
    cfg.step = 0.6;
    cfg.thinning = 5;
    cfg.chains = 2;
    let (r, _) = run(&cfg, &obs("x1^2,x2^4,x1*x2*x1*x2,x1^2*x2^2")).unwrap();
    assert_close(&r.stats[0], 1.0, 4.0, 0.0);
    assert_close(&r.stats[1], wick(4, 5), 4.0, 0.0);
    // Two independent GUE matrices: (1/N) E Tr ABAB = 1/N², (1/N) E Tr A²B² = 1.
    assert_close(&r.stats[2], 1.0 / 25.0, 4.0, 0.0);
    assert_close(&r.stats[3], 1.0, 4.0, 0.0);
}

#[test]
fn langevin_and_coulomb_gas_agree() {
    let v = parse_potential("0.05*x1^4 - 0.1*x1^3", 1).unwrap();
    let mut a = MatrixEnsembleConfig::gibbs(8, v.clone(), SamplerKind::Metropolis, 8000, 6);
    a.step = 1.5;
    a.thinning = 10;
    let mut b = MatrixEnsembleConfig::gibbs(8, v, SamplerKind::Langevin, 4000, 7);
    b.step = 0.15;
    b.thinning = 5;
    b.chains = 2;
    let o = obs("x1,x1^2,x1^4");
    let (ra, _) = run(&a, &o).unwrap();
    let (rb, _) = run(&b, &o).unwrap();
    for (sa, sb) in ra.stats.iter().zip(&rb.stats) {
        let se = (sa.std_error.powi(2) + sb.std_error.powi(2)).sqrt();
        assert!(
            (sa.mean - sb.mean).abs() < 4.0 * se,
            "{}: {} vs {} (se {se})",
            sa.label,
            sa.mean,
            sb.mean
        );
    }
    assert!(rb.acceptance.iter().all(|r| r.unwrap() > 0.3));
}

#[test]
fn two_matrix_samplers_agree() {
    let v = parse_potential("0.05*x1^4 + 0.05*x2^4 + 0.2*x1*x2", 2).unwrap();
    let mut a = MatrixEnsembleConfig::gibbs(5, v.clone(), SamplerKind::Metropolis, 4000, 8);
    a.step = 0.6;
    a.thinning = 5;
    a.chains = 2;
    let mut b = MatrixEnsembleConfig::gibbs(5, v, SamplerKind::Langevin, 4000, 9);
    b.step = 0.15;
    b.thinning = 5;
    b.chains = 2;
    let o = obs("x1*x2,x1^2,x1^2*x2^2");
    let (ra, _) = run(&a, &o).unwrap();
    let (rb, _) = run(&b, &o).unwrap();
    for (sa, sb) in ra.stats.iter().zip(&rb.stats) {
        let se = (sa.std_error.powi(2) + sb.std_error.powi(2)).sqrt();
        assert!(
            (sa.mean - sb.mean).abs() < 4.0 * se,
            "{}: {} vs {} (se {se})",
            sa.label,
            sa.mean,
            sb.mean
        );
    }
}

#[test]
fn fluctuation_examples_at_v0() {
    let cfg = MatrixEnsembleConfig::gue(150, 1, 20_000, 10);
    let cfg = MatrixEnsembleConfig {
        representation: Representation::Spectral,
        ..cfg
    };
    for (p, sigma2, mu) in [("x1^2", 2.0, 1.0), ("x1^4", 36.0, 2.0)] {
        let r = fluctuation_test(&cfg, &Observable::parse(p).unwrap(), sigma2, Some(mu)).unwrap();
        assert!(r.within(0.15) && r.looks_gaussian(4.0), "{r:?}");
        assert!(r.passed, "{r:?}");
    }
    let pair = MatrixEnsembleConfig::gue(60, 2, 10_000, 11);
    let r = fluctuation_test(&pair, &Observable::parse("x1*x2").unwrap(), 1.0, Some(0.0)).unwrap();
    assert!(r.within(0.15) && r.passed, "{r:?}");
}

#[test]
fn tail_examples() {
    let mut cfg = MatrixEnsembleConfig::gue(50, 1, 400, 12);
    cfg.representation = Representation::Spectral;
    let far = tail_test(&cfg, 3.0, &[50, 100, 200]).unwrap();
    assert!(far.passed, "{far:?}");
    assert!(far.rows[0].frequency < 0.01);
    let bulk = tail_test(&cfg, 1.5, &[50, 100, 200]).unwrap();
    assert!(bulk.rows.iter().all(|r| r.frequency > 0.99), "{bulk:?}");
    cfg.cutoff = Some(2.5);
    let cut = tail_test(&cfg, 2.5, &[50, 100, 200]).unwrap();
    assert!(cut.rows.iter().all(|r| r.exceed == 0) && cut.passed);
}

#[test]
fn cutoff_at_v0_bounds_every_full_matrix_draw() {
    let mut cfg = MatrixEnsembleConfig::gue(30, 1, 300, 13);
    cfg.cutoff = Some(3.0);
    let r = tail_test(&cfg, 3.0, &[30]).unwrap();
    assert_eq!(r.rows[0].exceed, 0);
}

#[test]
fn binary_trace_round_trips_a_run() {
    let cfg = MatrixEnsembleConfig::gue(10, 1, 50, 14);
    let (_, trace) = run(&cfg, &obs("x1^2,x1^4")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.bin");
    write_trace(std::fs::File::create(&path).unwrap(), trace.width(), &trace.rows()).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), 16 + 50 * 2 * 8);
    let (w, rows) = read_trace(bytes.as_slice()).unwrap();
    assert_eq!(w, 2);
    assert_eq!(rows, trace.rows());
}

#[test]
fn identical_seeds_give_identical_reports() {
    let v = parse_potential("0.05*x1^4", 1).unwrap();
    let mut cfg = MatrixEnsembleConfig::gibbs(20, v, SamplerKind::Metropolis, 200, 15);
    cfg.chains = 3;
    let o = obs("x1^2");
    let (_, a) = run(&cfg, &o).unwrap();
    let (_, b) = run(&cfg, &o).unwrap();
    assert_eq!(a, b);
    cfg.seed = 16;
    let (_, c) = run(&cfg, &o).unwrap();
    assert_ne!(a, c);
}

#[test]
fn thermodynamic_integration_demo() {
    let v = parse_potential("0.01*x1^4", 1).unwrap();
    let mut cfg = MatrixEnsembleConfig::gibbs(12, v, SamplerKind::Metropolis, 2000, 17);
    cfg.step = 1.5;
    cfg.thinning = 5;
    let r = thermo_integration(&cfg, 3, 3).unwrap();
    assert_eq!(r.nodes.len(), 3);
    // Leading order: log Z ≈ N² F⁰ ≈ −2 N² t.
    assert!((r.f0 - (-0.02 + 18e-4 - 288e-6)).abs() < 1e-12);
    assert!(
        (r.log_z - r.series_log_z).abs() < 5.0 * r.log_z_std_error + 0.05,
        "{r:?}"
    );
}

#[test]
fn convexity_probe_flags_nonconvex_directions() {
    let v = parse_potential("0.05*x1^4", 1).unwrap();
    let mut cfg = MatrixEnsembleConfig::gibbs(10, v, SamplerKind::Metropolis, 1, 18);
    cfg.step = 1.5;
    let convex = convexity_scan(&cfg, 3, 4, 1.0 - 1e-6).unwrap();
    assert!(convex.warning.is_none(), "{convex:?}");
    let mut cfg = MatrixEnsembleConfig::gibbs(
        10,
        parse_potential("-0.3*x1^2 + 0.05*x1^4", 1).unwrap(),
        SamplerKind::Metropolis,
        1,
        18,
    );
    cfg.step = 1.5;
    let soft = convexity_scan(&cfg, 3, 4, 1.0).unwrap();
    assert!(soft.warning.is_some() && soft.min_curvature < 1.0);
}
