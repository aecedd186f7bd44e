use lame_spectra::curve::{curve_equations, fiber_points};
use lame_spectra::lame::{
    apply_l, apply_ltilde, build_big_psi, build_m, continuum_limit_defect, gauge, residual, solve_bloch_coeffs,
    CurvePoint, LameContext,
};
use lame_spectra::theta::{EllipticParams, ThetaEvaluator};
use lame_spectra::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx(ell: usize) -> LameContext {
    let ev = ThetaEvaluator::new(EllipticParams::with_default_tol(C64::new(0.0, 1.2), C64::new(0.17, 0.0)).unwrap());
    LameContext::new(ell, ev.unwrap()).unwrap()
}

#[test]
fn eigenfunctions_in_the_entire_gauge() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for ell in 1..=3 {
        let c = ctx(ell);
        for p in fiber_points(C64::new(0.29, 0.21), &c).unwrap() {
            let s = solve_bloch_coeffs(&p, &c).unwrap();
            let psi = |x: C64| build_big_psi(&p, &s, x, &c).unwrap();
            for _ in 0..20 {
                let x = C64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
                if c.ev().theta1(x).norm() < 1e-2 {
                    continue;
                }
                let lhs = apply_l(psi, x, &c).unwrap();
                let scale = psi(x + c.eta()).norm() + psi(x - c.eta()).norm() + (p.e * psi(x)).norm();
                assert!((lhs - p.e * psi(x)).norm() < 1e-9 * scale.max(1e-300), "ell={ell} x={x}");
            }
        }
    }
}

#[test]
fn gauge_transform_conjugates_the_two_operators() {
    let c = ctx(2);
    let psi = |x: C64| (2.0 * x).exp() + x * x;
    for x in [C64::new(0.31, 0.12), C64::new(-0.2, 0.4)] {
        let big = |y: C64| gauge(y, &c) * psi(y);
        let want = apply_l(big, x, &c).unwrap() / gauge(x, &c);
        let got = apply_ltilde(psi, x, &c).unwrap();
        assert!((got - want).norm() < 1e-12 * want.norm().max(1.0));
    }
}

#[test]
fn ell1_determinants_and_curve_sums_share_their_zeros() {
    // on-curve points zero both formulations; random points zero neither
    let c = ctx(1);
    for p in fiber_points(C64::new(0.33, -0.27), &c).unwrap() {
        let (d0, d1) = residual(&p, &c).unwrap();
        assert!(d0.norm() < 1e-12 && d1.norm() < 1e-12);
        assert!(curve_equations(&p, &c).unwrap().relative() < 1e-12);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut off = 0;
    for _ in 0..10 {
        let p = CurvePoint::new(
            C64::new(rng.random_range(-0.4..0.4), rng.random_range(0.1..0.5)),
            C64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..6.0)),
            C64::new(rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0)),
        );
        let m = build_m(&p, &c).unwrap();
        assert_eq!(m.shape(), (2, 1));
        let det_off = lame_spectra::lame::residual_relative(&p, &c).unwrap() > 1e-6;
        if det_off && curve_equations(&p, &c).unwrap().relative() > 1e-6 {
            off += 1;
        }
    }
    assert_eq!(off, 10, "random points are off the curve");
}

#[test]
fn continuum_limit_error_is_first_order() {
    let xs: Vec<C64> = (0..16).map(|m| C64::new(-0.5 + m as f64 / 16.0, 0.07)).collect();
    for ell in 1..=3 {
        let (_, e2) = continuum_limit_defect(ell, 1e-2, C64::new(0.0, 1.2), &xs).unwrap();
        let (_, e3) = continuum_limit_defect(ell, 1e-3, C64::new(0.0, 1.2), &xs).unwrap();
        assert!((5.0..=20.0).contains(&(e2 / e3)), "ell={ell}: {e2} / {e3}");
    }
}
