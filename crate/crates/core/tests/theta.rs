use std::f64::consts::PI;

use lame_spectra::theta::{EllipticParams, HalfPeriod, ThetaEvaluator};
use lame_spectra::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn ev(tau: C64) -> ThetaEvaluator {
    ThetaEvaluator::new(EllipticParams::with_default_tol(tau, C64::new(0.17, 0.0)).unwrap()).unwrap()
}

/// θ₁ from its product expansion, truncated once the factors are 1 to machine precision.
fn theta1_product(x: C64, tau: C64) -> C64 {
    let q = (I * PI * tau).exp();
    let mut p = 2.0 * (I * PI * tau / 4.0).exp() * (PI * x).sin();
    let cos2 = (2.0 * PI * x).cos();
    let mut n = 1;
    loop {
        let q2n = q.powi(2 * n);
        p *= (1.0 - q2n) * (1.0 - 2.0 * q2n * cos2 + q2n * q2n);
        if q2n.norm() < 1e-18 {
            return p;
        }
        n += 1;
    }
}

fn grid() -> Vec<C64> {
    (0..100).map(|m| C64::new(-0.5 + (m % 10) as f64 / 10.0 + 0.013, -0.45 + (m / 10) as f64 / 10.0)).collect()
}

#[test]
fn series_matches_product_formula() {
    let e = ev(C64::new(0.0, 1.3));
    let x = C64::new(0.37, 0.11);
    assert!((e.theta1(x) - theta1_product(x, e.tau())).norm() < 1e-12);
    for tau in [C64::new(0.0, 1.0), C64::new(0.0, 1.3), C64::new(0.5, 1.5)] {
        let e = ev(tau);
        for x in grid() {
            let (s, p) = (e.theta1(x), theta1_product(x, tau));
            assert!((s - p).norm() < 1e-12 * p.norm().max(1.0), "tau={tau} x={x}: {s} vs {p}");
        }
    }
}

#[test]
fn monodromy_of_all_four_thetas() {
    for tau in [C64::new(0.0, 1.2), C64::new(0.3, 1.4)] {
        let e = ev(tau);
        for x in grid().into_iter().step_by(7) {
            for a in 1..=4usize {
                let t = e.theta(a, x).unwrap();
                let s1 = if a == 1 || a == 2 { -1.0 } else { 1.0 };
                let st = if a == 1 || a == 4 { -1.0 } else { 1.0 };
                let plus_tau = st * (-I * PI * tau - 2.0 * I * PI * x).exp() * t;
                let minus_tau = st * (-I * PI * tau + 2.0 * I * PI * x).exp() * t;
                let checks = [
                    (e.theta(a, x + 1.0).unwrap(), s1 * t),
                    (e.theta(a, x - 1.0).unwrap(), s1 * t),
                    (e.theta(a, x + tau).unwrap(), plus_tau),
                    (e.theta(a, x - tau).unwrap(), minus_tau),
                ];
                for (got, want) in checks {
                    assert!((got - want).norm() < 1e-11 * want.norm().max(1.0), "a={a} x={x}");
                }
            }
        }
    }
}

#[test]
fn derivative_matches_central_differences_quadratically() {
    let e = ev(C64::new(0.0, 1.2));
    let x = C64::new(0.23, 0.08);
    let fd = |h: f64| (e.theta1(x + h) - e.theta1(x - h)) / (2.0 * h);
    let d = e.theta1_prime(x);
    let (e3, e4) = ((d - fd(1e-3)).norm(), (d - fd(1e-4)).norm());
    assert!(e3 < 1e-5 && e4 < 1e-7);
    let order = (e3 / e4).log10();
    assert!((1.7..2.3).contains(&order), "observed order {order}");
}

#[test]
fn weierstrass_p_matches_second_difference_of_log_theta() {
    let e = ev(C64::new(0.0, 1.1));
    let x = C64::new(0.31, 0.0);
    let h = 1e-4;
    let l = |y: C64| e.theta1(y).ln();
    let fd = -(l(x + h) - 2.0 * l(x) + l(x - h)) / (h * h);
    assert!((e.weierstrass_p(x).unwrap() - fd).norm() < 1e-6 * fd.norm().max(1.0));
}

#[test]
fn doubling_the_cutoff_changes_nothing() {
    for tau in [C64::new(0.0, 1.0), C64::new(0.5, 1.5)] {
        let params = EllipticParams::with_default_tol(tau, C64::new(0.17, 0.0)).unwrap();
        let base = ThetaEvaluator::new(params).unwrap();
        let doubled = ThetaEvaluator::with_cutoff(params, 2 * base.series_cutoff()).unwrap();
        for x in grid() {
            for a in 1..=4 {
                let (u, v) = (base.theta(a, x).unwrap(), doubled.theta(a, x).unwrap());
                assert!((u - v).norm() < params.tol * u.norm().max(1.0));
            }
        }
    }
}

#[test]
fn half_period_shifts_agree_both_ways() {
    let e = ev(C64::new(0.2, 1.3));
    for x in grid().into_iter().step_by(9) {
        for shift in [HalfPeriod::Real, HalfPeriod::Tau, HalfPeriod::Both] {
            for sign in [1, -1] {
                let h = e.theta_halfshift(x, shift, sign).unwrap();
                assert!((h.direct - h.via_identity).norm() < 1e-11 * h.direct.norm().max(1.0));
            }
        }
    }
}
