use num_traits::Zero;
use proptest::prelude::*;

use super::*;
use crate::mapcount::{census_series, one_star_genus1, two_star_planar, DEFAULT_HALF_EDGE_CAP};
use crate::ncpoly::{parse_polynomial, parse_potential};
use crate::scalar::GaussRational;
use crate::Complex64;

type Q = GaussRational;
type SP = Polynomial<Series<Q>>;

fn lift(p: &Polynomial<Q>) -> SP {
    p.map_coeffs(|c| Series::constant(c.clone()))
}

fn poly(s: &str) -> SP {
    lift(&parse_polynomial::<Q>(s).unwrap())
}

fn num(n: i64) -> Series<Q> {
    Series::constant(Q::from_i64(n))
}

fn state(v: &str, m: usize, k: usize) -> (Potential<Q>, SeriesState<Q>) {
    let v: Potential<Q> = if v.is_empty() {
        Potential::zero(m)
    } else {
        parse_potential(v, m).unwrap()
    };
    let mu = SeriesState::new(&v, k);
    (v, mu)
}

const TWO_COLOR: &str = "t*x1^4 + t*x2^4 + b*x1*x2";

#[test]
fn xi_at_zero_coupling() {
    let (v, mu) = state("", 1, 0);
    let ctx = OperatorContext::series(&v, &mu);
    assert!(ctx.xi2(&poly("x1^2")).unwrap().is_zero());
    assert_eq!(ctx.xi(&poly("x1^2")).unwrap(), poly("x1^2"));
    assert_eq!(ctx.xi2(&poly("x1^4")).unwrap(), poly("2*x1^2"));
    assert_eq!(ctx.xi(&poly("x1^4")).unwrap(), poly("x1^4 - 2*x1^2"));
}

#[test]
fn xi1_of_a_letter_is_the_gradient() {
    let (v, mu) = state(TWO_COLOR, 2, 2);
    let ctx = OperatorContext::series(&v, &mu);
    let grad = v.series_gradient();
    for (i, g) in grad.iter().enumerate() {
        let x = SP::var(Color::from_index(i));
        assert_eq!(ctx.xi1(&x), g.pi());
    }
}

#[test]
fn xi0_inverse_examples() {
    let (v, mu) = state("", 1, 0);
    let ctx = OperatorContext::series(&v, &mu);
    assert_eq!(ctx.xi0_inverse(&poly("x1^4")).unwrap(), poly("x1^4 + 2*x1^2"));
    assert_eq!(ctx.xi0_inverse(&poly("x1")).unwrap(), poly("x1"));
    assert_eq!(ctx.xi_inverse(&poly("x1^4")).unwrap(), poly("x1^4 + 2*x1^2"));
}

#[test]
fn xi_inverse_at_order_zero_is_xi0_inverse() {
    let (v, mu) = state(TWO_COLOR, 2, 0);
    let ctx = OperatorContext::series(&v, &mu);
    let p = poly("x1^3*x2 + x2*x1^3 + x1^2 - 2*x2^4");
    assert_eq!(ctx.xi_inverse(&p).unwrap(), ctx.xi0_inverse(&p).unwrap());
}

#[test]
fn xibar_and_hessian_examples() {
    let (v, mu) = state("", 1, 0);
    let ctx = OperatorContext::series(&v, &mu);
    assert_eq!(ctx.xibar(&poly("x1^2")).unwrap(), poly("2*x1^2 - 2"));

    let (v, mu) = state("t*x1^4", 1, 2);
    let ctx = OperatorContext::series(&v, &mu);
    let h = ctx.hess_apply(&VectorPolynomial::new(vec![poly("x1")]));
    let t = Series::<Q>::var(0);
    assert_eq!(
        h.components()[0],
        SP::monomial(Monomial::from_indices(&[0; 3]), t.scale(&Q::from_i64(12)))
    );
    let xb = ctx.xibar(&poly("x1")).unwrap();
    let mut expect = poly("x1");
    expect.add_assign_ref(&v.series_gradient()[0]);
    assert_eq!(xb, expect);
}

#[test]
fn covariance_examples() {
    let (v, mu) = state("", 1, 0);
    let ctx = OperatorContext::series(&v, &mu);
    let x = VectorPolynomial::new(vec![poly("x1")]);
    assert_eq!(ctx.covariance_c(&x, &x).unwrap(), num(2));
    let z = VectorPolynomial::zero(1);
    assert!(ctx.covariance_c(&z, &z).unwrap().is_zero());
    let p = VectorPolynomial::new(vec![poly("x1^3 + 2*x1")]);
    assert_eq!(ctx.covariance_c(&p, &p).unwrap(), num(36));
}

#[test]
fn gaussian_variances() {
    let (v, mu) = state("", 1, 0);
    let ctx = OperatorContext::series(&v, &mu);
    for (k, expect) in [(2, 2), (3, 12), (4, 36)] {
        let p = SP::word(Monomial::power(Color::from_index(0), k));
        assert_eq!(ctx.sigma2(&p, &p).unwrap(), num(expect), "x^{k}");
    }
}

#[test]
fn phi_examples() {
    let (v, mu) = state("", 1, 0);
    let ctx = OperatorContext::series(&v, &mu);
    assert!(ctx.phi0(&poly("x1^2")).unwrap().is_zero());
    assert_eq!(ctx.phi0(&poly("x1^4")).unwrap(), num(4));
    assert_eq!(ctx.phi(&poly("x1^4")).unwrap(), num(1));
    assert!(ctx.phi(&poly("x1")).unwrap().is_zero());
    let (v2, mu2) = state(TWO_COLOR, 2, 2);
    let ctx2 = OperatorContext::series(&v2, &mu2);
    assert!(ctx2.phi(&poly("3*x1 - x2")).unwrap().is_zero());
}

#[test]
fn second_order_correction_examples() {
    let (v, mu) = state("", 1, 0);
    let ctx = OperatorContext::series(&v, &mu);
    assert_eq!(ctx.second_order_correction(&poly("x1^4")).unwrap(), num(1));
    assert!(ctx.second_order_correction(&poly("x1^2")).unwrap().is_zero());

    let (v, mu) = state("t*x1^4", 1, 1);
    let ctx = OperatorContext::series(&v, &mu);
    let c = ctx.second_order_correction(&poly("x1^2")).unwrap();
    let maps = census_series(&[Monomial::from_indices(&[0, 0])], &v, 1, 1, DEFAULT_HALF_EDGE_CAP).unwrap();
    assert_eq!(c, maps);
    assert!(!c.coeff(&[1]).is_zero());
}

#[test]
fn correction_matches_genus_one_recursion() {
    let (v, mu) = state(TWO_COLOR, 2, 2);
    let ctx = OperatorContext::series(&v, &mu);
    for w in ["x1^4", "x1*x2", "x1^2*x2^2", "x1*x2*x1*x2", "x1^3*x2"] {
        let m = crate::ncpoly::parse_monomial(w).unwrap();
        let lhs = ctx.second_order_correction(&SP::word(m.clone())).unwrap();
        let rhs = one_star_genus1(&m, &v, 2).unwrap();
        assert_eq!(lhs, rhs, "{w}");
    }
}

#[test]
fn sigma2_equals_planar_two_star_maps() {
    let (v, mu) = state("t*x1^4", 1, 2);
    let ctx = OperatorContext::series(&v, &mu);
    for a in 1..=4 {
        for b in 1..=4 {
            let (p, q) = (Monomial::from_indices(&vec![0; a]), Monomial::from_indices(&vec![0; b]));
            let lhs = ctx.sigma2(&SP::word(p.clone()), &SP::word(q.clone())).unwrap();
            assert_eq!(lhs, two_star_planar(&p, &q, &v, 2).unwrap(), "x^{a}, x^{b}");
        }
    }
    let (v, mu) = state(TWO_COLOR, 2, 2);
    let ctx = OperatorContext::series(&v, &mu);
    let words: Vec<Monomial> = ["x1", "x2", "x1*x2", "x1^2", "x1*x2^2", "x1*x2*x1*x2", "x1^2*x2^2"]
        .iter()
        .map(|w| crate::ncpoly::parse_monomial(w).unwrap())
        .collect();
    for p in &words {
        for q in &words {
            let lhs = ctx.sigma2(&SP::word(p.clone()), &SP::word(q.clone())).unwrap();
            assert_eq!(lhs, two_star_planar(p, q, &v, 2).unwrap(), "{p}, {q}");
        }
    }
}

#[test]
fn sigma2_against_brute_force_census() {
    let (v, mu) = state("t*x1^4", 1, 1);
    let ctx = OperatorContext::series(&v, &mu);
    let p = Monomial::from_indices(&[0, 0]);
    let q = Monomial::from_indices(&[0; 4]);
    let maps = census_series(&[p.clone(), q.clone()], &v, 1, 0, DEFAULT_HALF_EDGE_CAP).unwrap();
    assert_eq!(ctx.sigma2(&SP::word(p), &SP::word(q)).unwrap(), maps);
}

#[test]
fn numeric_context_rejects_series_only_operators() {
    let v: Potential<Complex64> = parse_potential("0.01*x1^4", 1).unwrap();
    let mu = crate::sdsolve::NumericState::solve(
        &v,
        &crate::sdsolve::SolverConfig {
            mode: crate::sdsolve::SolveMode::Numeric,
            max_degree: 16,
            ..Default::default()
        },
    )
    .unwrap();
    let ctx = OperatorContext::numeric(&v, &mu).unwrap();
    let p = parse_polynomial::<Complex64>("x1^4").unwrap();
    assert!(matches!(ctx.xi_inverse(&p), Err(SolveError::SeriesOnly(_))));
    let x = ctx.xi(&p).unwrap();
    assert!((x.coeff(&Monomial::from_indices(&[0; 4])) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
}

#[test]
fn resolvent_form_at_zero_coupling() {
    // At t = 0 on homogeneous degree-d components, I + Ξ̄ acts on DΣΞ⁻¹P;
    // check σ²(P, Q) = Σ_i μ(D_i P · w_i) with (I + Ξ̄) w = DQ, w = DΣΞ⁻¹Q.
    let (v, mu) = state("", 2, 0);
    let ctx = OperatorContext::series(&v, &mu);
    for (ps, qs) in [("x1^4", "x1^4"), ("x1*x2*x1*x2", "x1^2*x2^2"), ("x1^3", "x1 + x1*x2^2")] {
        let (p, q) = (poly(ps), poly(qs));
        let w = ctx.transported_gradient(&q).unwrap();
        let mut lhs = w.clone();
        lhs.add_assign_ref(&ctx.hess_apply(&w));
        lhs.add_assign_ref(&ctx.xibar_vec(&w).unwrap());
        assert_eq!(lhs, ctx.cyclic_gradient(&q), "{qs}");
        let dp = ctx.cyclic_gradient(&p);
        let mut rhs = Series::zero_to(0);
        for i in 0..2 {
            rhs.add_assign_ref(&mu.expect(&dp.components()[i].mul_ref(&w.components()[i]), 0).unwrap());
        }
        assert_eq!(ctx.sigma2(&p, &q).unwrap(), rhs, "{ps}, {qs}");
    }
}

fn arb_poly(m: u8, max_deg: usize) -> impl Strategy<Value = Polynomial<Q>> {
    prop::collection::vec((prop::collection::vec(0..m, 1..=max_deg), -3i64..=3), 1..4).prop_map(|terms| {
        Polynomial::from_terms(
            terms
                .into_iter()
                .map(|(w, c)| (Monomial::from_indices(&w), Q::from_i64(c))),
        )
    })
}

fn arb_self_adjoint(m: u8, max_deg: usize) -> impl Strategy<Value = Polynomial<Q>> {
    arb_poly(m, max_deg).prop_map(|p| {
        let mut s = p.clone();
        s.add_assign_ref(&p.involution());
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn commutation_relation(p in arb_poly(2, 6)) {
        let (v, mu) = state(TWO_COLOR, 2, 2);
        let ctx = OperatorContext::series(&v, &mu);
        let p = lift(&p).pi();
        let lhs = ctx.cyclic_gradient(&ctx.xi(&p).unwrap()).truncate(2);
        let w = ctx.cyclic_gradient(&p.sigma());
        let mut rhs = w.clone();
        rhs.add_assign_ref(&ctx.hess_apply(&w));
        rhs.add_assign_ref(&ctx.xibar_vec(&w).unwrap());
        prop_assert_eq!(lhs, rhs.truncate(2));
    }

    #[test]
    fn xibar_symmetry(p in arb_poly(2, 4), q in arb_poly(2, 4)) {
        let (v, mu) = state(TWO_COLOR, 2, 2);
        let ctx = OperatorContext::series(&v, &mu);
        let (p, q) = (lift(&p).pi(), lift(&q).pi());
        let lhs = mu.expect(&p.mul_ref(&ctx.xibar(&q).unwrap()), 2).unwrap();
        let mut rhs = Series::zero_to(2);
        for k in Color::all(2) {
            rhs.add_assign_ref(&mu.expect_tensor(&p.partial(k).mul_ref(&q.partial(k).transpose()), 2).unwrap());
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn xibar_nonnegative_at_zero_coupling(p in arb_self_adjoint(2, 4)) {
        let (v, mu) = state("", 2, 0);
        let ctx = OperatorContext::series(&v, &mu);
        let p = lift(&p).pi();
        let s = mu.expect(&p.mul_ref(&ctx.xibar(&p.involution()).unwrap()), 0).unwrap();
        prop_assert!(s.constant_term().to_c64().re >= 0.0);
    }

    #[test]
    fn variance_identity(p in arb_poly(2, 5), q in arb_poly(2, 5)) {
        let (v, mu) = state(TWO_COLOR, 2, 3);
        let ctx = OperatorContext::series(&v, &mu);
        let (p, q) = (lift(&p).pi(), lift(&q).pi());
        let lhs = ctx.sigma2(&ctx.xi(&p).unwrap(), &q).unwrap();
        let dsp = ctx.cyclic_gradient(&p.sigma());
        let dq = ctx.cyclic_gradient(&q);
        let mut rhs = Series::zero_to(3);
        for i in 0..2 {
            rhs.add_assign_ref(&mu.expect(&dsp.components()[i].mul_ref(&dq.components()[i]), 3).unwrap());
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn sigma2_bilinear_and_symmetric(p in arb_poly(2, 4), q in arb_poly(2, 4), r in arb_poly(2, 4), c in -3i64..=3) {
        let (v, mu) = state(TWO_COLOR, 2, 1);
        let ctx = OperatorContext::series(&v, &mu);
        let (p, q, r) = (lift(&p), lift(&q), lift(&r));
        prop_assert_eq!(ctx.sigma2(&p, &q).unwrap(), ctx.sigma2(&q, &p).unwrap());
        let mut pr = p.clone();
        pr.add_scaled(&r, &num(c));
        let lhs = ctx.sigma2(&pr, &q).unwrap();
        let rhs = ctx.sigma2(&p, &q).unwrap() + ctx.sigma2(&r, &q).unwrap() * num(c);
        prop_assert_eq!(lhs, rhs);
        prop_assert!(ctx.sigma2(&p, &SP::one()).unwrap().is_zero());
    }

    #[test]
    fn mixed_partial_identity(p in arb_poly(2, 5), q in arb_poly(2, 5)) {
        let (v, mu) = state(TWO_COLOR, 2, 2);
        let (p, q) = (lift(&p), lift(&q));
        for k in Color::all(2) {
            for l in Color::all(2) {
                let a = p.cyclic_derivative(l).partial(k);
                prop_assert_eq!(q.cyclic_derivative(k).partial(l), q.cyclic_derivative(l).partial(k).transpose());
                let lhs = mu.expect_tensor(&a.mul_ref(&q.cyclic_derivative(k).partial(l)), 2).unwrap();
                let rhs = mu.expect_tensor(&a.mul_ref(&q.cyclic_derivative(l).partial(k).transpose()), 2).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
        let _ = v;
    }

    #[test]
    fn xi_inverse_round_trip(p in arb_poly(2, 5)) {
        let (v, mu) = state(TWO_COLOR, 2, 3);
        let ctx = OperatorContext::series(&v, &mu);
        let p = lift(&p).pi();
        let back = ctx.xi(&ctx.xi_inverse(&p).unwrap()).unwrap();
        prop_assert_eq!(back.truncate(3), p.truncate(3));
    }

    #[test]
    fn xi0_inverse_round_trip(p in arb_poly(2, 6)) {
        let (v, mu) = state(TWO_COLOR, 2, 2);
        let ctx = OperatorContext::series(&v, &mu);
        let p = lift(&p).pi();
        prop_assert_eq!(ctx.xi0(&ctx.xi0_inverse(&p).unwrap()).unwrap(), p.clone());
        prop_assert_eq!(ctx.xi0_inverse(&ctx.xi0(&p).unwrap()).unwrap(), p);
    }

    #[test]
    fn exact_and_float_backends_agree(p in arb_poly(2, 4), q in arb_poly(2, 4)) {
        let (v, mu) = state(TWO_COLOR, 2, 2);
        let ctx = OperatorContext::series(&v, &mu);
        let vf: Potential<Complex64> = v.map_scalar();
        let muf = SeriesState::new(&vf, 2);
        let ctxf = OperatorContext::series(&vf, &muf);
        let exact = ctx.sigma2(&lift(&p), &lift(&q)).unwrap();
        let to_f = |x: &Polynomial<Q>| x.map_coeffs(|c| Series::constant(c.to_c64()));
        let float = ctxf.sigma2(&to_f(&p), &to_f(&q)).unwrap();
        for (idx, c) in exact.terms() {
            let f = float.coefficient(idx);
            prop_assert!(c.to_c64().close_to(&f, 1e-12), "{} vs {}", c, f);
        }
        for (idx, f) in float.terms() {
            prop_assert!(exact.coefficient(idx).to_c64().close_to(f, 1e-12));
        }
    }
}
