use lame_spectra::bloch::{band_sweep, default_k_grid, hausdorff, numeric_band_edges, Coefficients, RationalEta};
use lame_spectra::curve::band_edges;
use lame_spectra::lame::LameContext;
use lame_spectra::theta::{EllipticParams, ThetaEvaluator};
use lame_spectra::C64;

fn ev(eta: C64, tau: C64) -> ThetaEvaluator {
    ThetaEvaluator::new(EllipticParams::with_default_tol(tau, eta).unwrap()).unwrap()
}

const X0: C64 = C64 { re: 0.123456, im: 0.0 };

#[test]
fn numeric_edges_match_analytic_edges_for_complex_tau() {
    let tau = C64::new(0.3, 1.4);
    for ell in [1usize, 2] {
        for (p, q) in [(1, 31), (2, 41)] {
            let re = RationalEta::new(p, q).unwrap();
            let e = ev(re.as_complex(), tau);
            let analytic = band_edges(&LameContext::new(ell, e.clone()).unwrap()).unwrap();
            let numeric = numeric_band_edges(&Coefficients::Lame { ell }, re, X0, &e).unwrap();
            let radius = numeric.scale;
            let d = hausdorff(&numeric.confident(), &analytic.union_with_reflection);
            assert!(d < 1e-5 * radius, "ell={ell} {p}/{q}: {d:e}");
        }
    }
}

#[test]
fn numeric_edges_do_not_depend_on_the_offset() {
    let re = RationalEta::new(1, 31).unwrap();
    let e = ev(re.as_complex(), C64::new(0.0, 1.2));
    for ell in [1usize, 2] {
        let a = numeric_band_edges(&Coefficients::Lame { ell }, re, X0, &e).unwrap().confident();
        let b = numeric_band_edges(&Coefficients::Lame { ell }, re, X0 + 0.01, &e).unwrap().confident();
        assert!(hausdorff(&a, &b) < 1e-8);
    }
}

#[test]
fn band_count_is_bounded_by_q_and_equals_2ell_plus_1() {
    let re = RationalEta::new(1, 31).unwrap();
    let e = ev(re.as_complex(), C64::new(0.0, 1.2));
    for ell in [1usize, 2] {
        let s = band_sweep(&Coefficients::Lame { ell }, re, X0, &default_k_grid(re, 48), &e).unwrap();
        assert!(s.stable_intervals.len() <= 31);
        assert_eq!(s.stable_intervals.len(), 2 * ell + 1, "ell={ell}");
        assert!(s.max_imag < 1e-8, "self-adjoint regime has real spectrum");
    }
}

#[test]
fn free_operator_has_a_single_band() {
    let re = RationalEta::new(1, 31).unwrap();
    let e = ev(re.as_complex(), C64::new(0.0, 1.2));
    let s = band_sweep(&Coefficients::Lame { ell: 0 }, re, X0, &default_k_grid(re, 32), &e).unwrap();
    assert_eq!(s.stable_intervals.len(), 1);
    let (lo, hi) = s.stable_intervals[0];
    assert!((lo + 2.0).abs() < 1e-10 && (hi - 2.0).abs() < 1e-10);
}

#[test]
fn sweep_is_deterministic() {
    let re = RationalEta::new(2, 41).unwrap();
    let e = ev(re.as_complex(), C64::new(0.0, 1.2));
    let run = || band_sweep(&Coefficients::Lame { ell: 2 }, re, X0, &default_k_grid(re, 16), &e).unwrap();
    assert_eq!(run(), run());
}
