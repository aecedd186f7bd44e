//! Named identity checks with per-check maximum relative error, shared by the CLI
//! `verify` command and the test suite.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curve::{
    a_polys_determinant, a_polys_recurrence, cauchy_det, curve_coeffs, fiber_points, weyl_denominator_check,
};
use crate::error::{Error, Result};
use crate::lame::{residual_relative, LameContext};
use crate::theta::{EllipticParams, HalfPeriod, ThetaEvaluator};

pub const SUITES: [&str; 7] = ["theta-monodromy", "cauchy", "schur", "apoly", "curve-symmetry", "cj-symmetry", "cj-limit"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_rel_err: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

struct Builder {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Builder {
    fn new(suite: &'static str) -> Self {
        Self { suite, checks: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, err: f64, threshold: f64) {
        self.checks.push(Check { name: name.into(), max_rel_err: err, threshold, pass: err < threshold });
    }

    fn finish(self) -> SuiteReport {
        let pass = self.checks.iter().all(|c| c.pass);
        SuiteReport { suite: self.suite.to_string(), checks: self.checks, pass }
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_err(a: C64, b: C64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

fn random_point(rng: &mut ChaCha8Rng, re: f64, im: f64) -> C64 {
    C64::new(rng.random_range(-re..re), rng.random_range(-im..im))
}

/// Runs the named suite. `ell` sets the largest order exercised.
pub fn run_suite(name: &str, ell: usize, params: &EllipticParams, seed: u64) -> Result<SuiteReport> {
    let ev = ThetaEvaluator::new(*params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match name {
        "theta-monodromy" => theta_monodromy(&ev, &mut rng),
        "cauchy" => cauchy(ell, &ev, &mut rng),
        "schur" => schur(ell, &mut rng),
        "apoly" => apoly(ell, &ev, &mut rng),
        "curve-symmetry" => curve_symmetry(ell, &ev, &mut rng),
        "cj-symmetry" => cj_symmetry(ell, &ev),
        "cj-limit" => cj_limit(ell, params),
        _ => Err(Error::InvalidParameter(format!("unknown suite '{name}'; expected one of {}", SUITES.join(", ")))),
    }
}

fn theta_monodromy(ev: &ThetaEvaluator, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let mut b = Builder::new("theta-monodromy");
    let tau = ev.tau();
    let i = C64::new(0.0, 1.0);
    let xs: Vec<C64> = (0..20).map(|_| random_point(rng, 0.5, 0.5 * tau.im)).collect();
    for a in 1..=4usize {
        let s1 = if a <= 2 { -1.0 } else { 1.0 };
        let st = if a == 1 || a == 4 { -1.0 } else { 1.0 };
        let (mut e1, mut et) = (0.0f64, 0.0f64);
        for &x in &xs {
            let t = ev.theta(a, x)?;
            for sg in [1.0, -1.0] {
                e1 = e1.max(rel_err(ev.theta(a, x + sg)?, s1 * t));
                let factor = st * (-PI * i * tau - sg * 2.0 * PI * i * x).exp();
                et = et.max(rel_err(ev.theta(a, x + sg * tau)?, factor * t));
            }
        }
        b.check(format!("theta{a}(x±1)"), e1, 1e-10);
        b.check(format!("theta{a}(x±tau)"), et, 1e-10);
    }
    let mut eh = 0.0f64;
    for &x in &xs {
        for shift in [HalfPeriod::Real, HalfPeriod::Tau, HalfPeriod::Both] {
            for sg in [1, -1] {
                let h = match ev.theta_halfshift(x, shift, sg) {
                    Ok(h) => h,
                    Err(Error::SeriesMismatch { error, .. }) => {
                        eh = eh.max(error);
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                eh = eh.max(rel_err(h.direct, h.via_identity));
            }
        }
    }
    b.check("half-period shifts", eh, 1e-10);
    Ok(b.finish())
}

fn cauchy(ell: usize, ev: &ThetaEvaluator, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let mut b = Builder::new("cauchy");
    let zeta = C64::new(0.23, 0.1);
    for n in 1..=ell.max(1) {
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let xs: Vec<C64> = (0..n).map(|_| random_point(rng, 0.4, 0.3)).collect();
            let (l, r) = cauchy_det(&xs, zeta, ev)?;
            worst = worst.max(rel_err(l, r));
        }
        b.check(format!("n={n}"), worst, 1e-9);
    }
    Ok(b.finish())
}

fn schur(ell: usize, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let mut b = Builder::new("schur");
    let q = C64::from_polar(1.0, 0.46);
    for l in 1..=ell.max(1) {
        let mut worst = 0.0f64;
        for z in [C64::new(0.7, 0.2), random_point(rng, 1.0, 1.0)] {
            let (lhs, rhs) = weyl_denominator_check(l, z, q)?;
            worst = worst.max(rel_err(lhs, rhs));
        }
        b.check(format!("ell={l}"), worst, 1e-10);
    }
    Ok(b.finish())
}

fn apoly(ell: usize, ev: &ThetaEvaluator, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let mut b = Builder::new("apoly");
    for l in 1..=ell.max(1) {
        let ctx = LameContext::new(l, ev.clone())?;
        let a = a_polys_recurrence(&ctx)?;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let e = random_point(rng, 2.0, 2.0);
            for s in 0..=l {
                worst = worst.max(rel_err(a_polys_determinant(s, e, &ctx)?, a[l - s].eval(e)));
            }
        }
        b.check(format!("recurrence vs determinant, ell={l}"), worst, 1e-10);
        let mut parity = 0.0f64;
        for s in 0..=l {
            let p = &a[l - s];
            let scale = p.scale().max(f64::MIN_POSITIVE);
            for (k, c) in p.coeffs.iter().enumerate() {
                if (k + s) % 2 == 1 {
                    parity = parity.max(c.norm() / scale);
                }
            }
        }
        b.check(format!("parity, ell={l}"), parity, 1e-12);
    }
    Ok(b.finish())
}

fn curve_symmetry(ell: usize, ev: &ThetaEvaluator, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let mut b = Builder::new("curve-symmetry");
    for l in 1..=ell.clamp(1, 3) {
        let ctx = LameContext::new(l, ev.clone())?;
        let zeta = random_point(rng, 0.4, 0.3) + C64::new(0.0, 0.1);
        let pts = fiber_points(zeta, &ctx)?;
        let (mut base, mut tau_shift, mut reflect, mut invol) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for p in &pts {
            base = base.max(residual_relative(p, &ctx)?);
            tau_shift = tau_shift.max(residual_relative(&p.shift_tau(ctx.eta(), ctx.tau()), &ctx)?);
            reflect = reflect.max(residual_relative(&p.reflect(), &ctx)?);
            invol = invol.max(residual_relative(&p.involution(ctx.n(), ctx.eta()), &ctx)?);
        }
        let count = if pts.is_empty() { f64::INFINITY } else { 0.0 };
        b.check(format!("points found, ell={l}"), count, 1.0);
        b.check(format!("on curve, ell={l}"), base, 1e-9);
        b.check(format!("zeta+tau, K e^(2 pi i eta), ell={l}"), tau_shift, 1e-9);
        b.check(format!("-K, -E, ell={l}"), reflect, 1e-9);
        b.check(format!("involution, ell={l}"), invol, 1e-9);
    }
    Ok(b.finish())
}

fn cj_symmetry(ell: usize, ev: &ThetaEvaluator) -> Result<SuiteReport> {
    let mut b = Builder::new("cj-symmetry");
    for l in 1..=ell.max(1) {
        let ctx = LameContext::new(l, ev.clone())?;
        let c = curve_coeffs(&ctx);
        let n = c.len() - 1;
        let sym = (0..=n).map(|j| rel_err(c[j], c[n - j])).fold(0.0, f64::max);
        b.check(format!("C_j = C_(N-j), ell={l}"), sym, 1e-10);
        b.check(format!("C_0 = 1, ell={l}"), (c[0] - 1.0).norm(), f64::MIN_POSITIVE);
    }
    Ok(b.finish())
}

/// Ordinary binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `|C_j(η) - binom(N, j)|` at `η = 10⁻², ½·10⁻², ¼·10⁻²` for every j.
pub fn cj_limit_errors(ell: usize, tau: C64, tol: f64) -> Result<Vec<[f64; 3]>> {
    let mut per_eta = Vec::new();
    for eta in [1e-2, 0.5e-2, 0.25e-2] {
        let ev = ThetaEvaluator::new(EllipticParams::new(tau, C64::new(eta, 0.0), tol)?)?;
        let ctx = LameContext::new(ell, ev)?;
        let c = curve_coeffs(&ctx);
        let n = c.len() - 1;
        per_eta.push((0..=n).map(|j| (c[j] - binomial(n, j)).norm()).collect::<Vec<_>>());
    }
    Ok((0..per_eta[0].len()).map(|j| [per_eta[0][j], per_eta[1][j], per_eta[2][j]]).collect())
}

fn cj_limit(ell: usize, params: &EllipticParams) -> Result<SuiteReport> {
    let mut b = Builder::new("cj-limit");
    for l in 1..=ell.max(1) {
        let errs = cj_limit_errors(l, params.tau, params.tol)?;
        // C_0 and C_N are exactly 1; only the interior coefficients carry a trend
        let interior = &errs[1..errs.len() - 1];
        let monotone = interior.iter().all(|e| e[1] < e[0] && e[2] < e[1]);
        let worst = interior.iter().map(|e| e[2]).fold(0.0, f64::max);
        b.check(format!("monotone decrease, ell={l}"), if monotone { 0.0 } else { 1.0 }, 0.5);
        b.check(format!("|C_j - binom(N,j)| at eta=0.0025, ell={l}"), worst, 1e-2 * binomial(l * (l + 1) / 2, l * (l + 1) / 4).max(1.0));
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> EllipticParams {
        EllipticParams::with_default_tol(C64::new(0.0, 1.2), C64::new(0.17, 0.0)).unwrap()
    }

    #[test]
    fn every_suite_passes_at_ell3() {
        for s in SUITES {
            let r = run_suite(s, 3, &params(), 7).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", 1, &params(), 0).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20.0);
        assert_eq!(binomial(3, 0), 1.0);
    }
}
