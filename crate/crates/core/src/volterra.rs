//! Elliptic solutions of the Volterra lattice `∂ₜc(x) = -c(x)(c(x+η) - c(x-η))` with
//!
//! ```text
//! c(x) = ρ(x+η)ρ(x-2η)/(ρ(x)ρ(x-η)),   ρ(x) = ∏_j θ₁(x-x_j)
//! ```
//!
//! and `M = ℓ(ℓ+1)/2` poles. Requiring the residues of the flow to cancel gives two
//! first-order systems for the poles; they agree exactly on the locus
//!
//! ```text
//! ∏_{k≠j} θ₁(x_jk+2η)θ₁²(x_jk-η)/(θ₁(x_jk-2η)θ₁²(x_jk+η)) = 1,   x_jk = x_j - x_k
//! ```

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::theta::ThetaEvaluator;

/// Pole positions at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleConfig {
    pub xs: Vec<C64>,
    pub t: f64,
}

impl PoleConfig {
    pub fn new(xs: Vec<C64>) -> Self {
        Self { xs, t: 0.0 }
    }

    pub fn translated(&self, c: C64) -> Self {
        Self { xs: self.xs.iter().map(|x| x + c).collect(), t: self.t }
    }
}

/// Zeros of ρ for the Lamé coefficient itself: `-(j+k-ℓ-1)η` for `1 ≤ j ≤ k ≤ ℓ`.
pub fn degenerate_config(ell: usize, eta: C64) -> PoleConfig {
    let mut xs = Vec::with_capacity(ell * (ell + 1) / 2);
    for j in 1..=ell {
        for k in j..=ell {
            xs.push(-eta * (j as f64 + k as f64 - ell as f64 - 1.0));
        }
    }
    PoleConfig::new(xs)
}

/// `ρ(x) = ∏ θ₁(x-x_j)`, failing if a factor vanishes.
fn rho(xs: &[C64], x: C64, ev: &ThetaEvaluator) -> Result<C64> {
    xs.iter().map(|p| ev.theta1_nonzero(x - p)).product()
}

/// `c(x) = ρ(x+η)ρ(x-2η)/(ρ(x)ρ(x-η))`.
pub fn c_from_poles(xs: &[C64], x: C64, ev: &ThetaEvaluator) -> Result<C64> {
    let eta = ev.eta();
    let num: C64 = xs.iter().map(|p| ev.theta1(x + eta - p) * ev.theta1(x - 2.0 * eta - p)).product();
    Ok(num / (rho(xs, x, ev)? * rho(xs, x - eta, ev)?))
}

/// `-c(x)(c(x+η) - c(x-η))`.
pub fn volterra_rhs_c(xs: &[C64], x: C64, ev: &ThetaEvaluator) -> Result<C64> {
    let eta = ev.eta();
    Ok(-c_from_poles(xs, x, ev)? * (c_from_poles(xs, x + eta, ev)? - c_from_poles(xs, x - eta, ev)?))
}

/// Smallest `|θ₁(x_j - x_k - s)|/|θ₁′(0)|` tolerated for `s ∈ {0, ±η, ±2η}`.
pub const TOL_MARGIN: f64 = 1e-6;

/// `min_{j≠k, s} |θ₁(x_j - x_k - s)|/|θ₁′(0)|` over `s ∈ {0, ±η, ±2η}`.
/// Below [`TOL_MARGIN`] it fails: a zero shift means coincident poles, a nonzero one
/// puts the configuration on the boundary of the locus.
pub fn margin(xs: &[C64], ev: &ThetaEvaluator) -> Result<f64> {
    let eta = ev.eta();
    let scale = ev.theta1_scale();
    let mut best = f64::INFINITY;
    for j in 0..xs.len() {
        for k in 0..xs.len() {
            if j == k {
                continue;
            }
            for shift in [0, 1, -1, 2, -2] {
                let m = ev.theta1(xs[j] - xs[k] - eta * shift as f64).norm() / scale;
                if m < TOL_MARGIN {
                    return Err(if shift == 0 {
                        Error::CoincidentPoles { j, k, margin: m }
                    } else {
                        Error::LocusBoundary { j, k, shift, margin: m }
                    });
                }
                best = best.min(m);
            }
        }
    }
    Ok(best)
}

/// Velocities from both pole systems, each including the factor `θ₁(2η)/θ₁′(0)`:
///
/// ```text
/// first_j  = ∏_{k≠j} θ₁(x_jk+2η)θ₁(x_jk-η)/(θ₁(x_jk+η)θ₁(x_jk))
/// second_j = ∏_{k≠j} θ₁(x_jk-2η)θ₁(x_jk+η)/(θ₁(x_jk-η)θ₁(x_jk))
/// ```
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleVelocities {
    pub first: Vec<C64>,
    pub second: Vec<C64>,
    /// `θ₁(2η)/θ₁′(0)`, the single-pole speed.
    pub unit: C64,
}

impl PoleVelocities {
    /// `max_j |first_j - second_j| / |unit|`; zero exactly on the locus.
    pub fn gap(&self) -> f64 {
        self.first
            .iter()
            .zip(&self.second)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / self.unit.norm()
    }
}

pub fn pole_rhs(xs: &[C64], ev: &ThetaEvaluator) -> Result<PoleVelocities> {
    margin(xs, ev)?;
    let eta = ev.eta();
    let t1 = |x: C64| ev.theta1(x);
    let unit = t1(2.0 * eta) / ev.theta1_prime(C64::new(0.0, 0.0));
    let mut first = Vec::with_capacity(xs.len());
    let mut second = Vec::with_capacity(xs.len());
    for (j, xj) in xs.iter().enumerate() {
        let (mut p1, mut p2) = (unit, unit);
        for (k, xk) in xs.iter().enumerate() {
            if k == j {
                continue;
            }
            let d = xj - xk;
            p1 *= t1(d + 2.0 * eta) * t1(d - eta) / (t1(d + eta) * t1(d));
            p2 *= t1(d - 2.0 * eta) * t1(d + eta) / (t1(d - eta) * t1(d));
        }
        first.push(p1);
        second.push(p2);
    }
    Ok(PoleVelocities { first, second, unit })
}

/// Locus residuals `∏_{k≠j}(…) - 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocusReport {
    pub residuals: Vec<C64>,
    pub max_norm: f64,
}

pub fn locus_residual(xs: &[C64], ev: &ThetaEvaluator) -> Result<LocusReport> {
    margin(xs, ev)?;
    let eta = ev.eta();
    let t1 = |x: C64| ev.theta1(x);
    let residuals: Vec<C64> = xs
        .iter()
        .enumerate()
        .map(|(j, xj)| {
            let mut p = C64::new(1.0, 0.0);
            for (k, xk) in xs.iter().enumerate() {
                if k != j {
                    let d = xj - xk;
                    p *= t1(d + 2.0 * eta) * t1(d - eta).powi(2) / (t1(d - 2.0 * eta) * t1(d + eta).powi(2));
                }
            }
            p - 1.0
        })
        .collect();
    let max_norm = residuals.iter().map(|r| r.norm()).fold(0.0, f64::max);
    Ok(LocusReport { residuals, max_norm })
}

#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    /// The starting configuration must have a locus gap below this.
    pub tol_locus: f64,
    /// The run halts when the gap exceeds `drift_factor · tol_locus`.
    pub drift_factor: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { tol_locus: 1e-9, drift_factor: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSample {
    pub t: f64,
    pub xs: Vec<C64>,
    pub gap: f64,
    pub margin: f64,
}

fn sample(xs: &[C64], t: f64, ev: &ThetaEvaluator) -> Result<(FlowSample, Vec<C64>)> {
    let v = pole_rhs(xs, ev)?;
    let m = if xs.len() > 1 { margin(xs, ev)? } else { f64::INFINITY };
    Ok((FlowSample { t, xs: xs.to_vec(), gap: v.gap(), margin: m }, v.first))
}

fn axpy(xs: &[C64], h: f64, v: &[C64]) -> Vec<C64> {
    xs.iter().zip(v).map(|(x, d)| x + d * h).collect()
}

/// Classical RK4 on the first pole system with fixed step `dt` from `cfg0.t` to
/// `t_end` (either direction), calling `sink` for every sample including the first.
/// Fails at the start if the configuration is off the locus, and mid-run on a margin
/// violation or when the gap drifts past `drift_factor · tol_locus`.
pub fn integrate_flow_with<F: FnMut(&FlowSample)>(
    cfg0: &PoleConfig,
    t_end: f64,
    dt: f64,
    opts: &FlowOptions,
    ev: &ThetaEvaluator,
    mut sink: F,
) -> Result<PoleConfig> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let (first, mut v) = sample(&cfg0.xs, cfg0.t, ev)?;
    if first.gap > opts.tol_locus {
        return Err(Error::OffLocus { gap: first.gap });
    }
    sink(&first);
    let span = t_end - cfg0.t;
    let steps = (span.abs() / dt).round() as usize;
    let h = if steps == 0 { 0.0 } else { span / steps as f64 };
    let limit = opts.drift_factor * opts.tol_locus;
    let mut xs = cfg0.xs.clone();
    let mut t = cfg0.t;
    let rhs = |y: &[C64], t: f64| -> Result<Vec<C64>> {
        pole_rhs(y, ev).map(|v| v.first).map_err(|e| Error::MarginViolation { t, source: Box::new(e) })
    };
    for n in 1..=steps {
        let k1 = v;
        let k2 = rhs(&axpy(&xs, h / 2.0, &k1), t + h / 2.0)?;
        let k3 = rhs(&axpy(&xs, h / 2.0, &k2), t + h / 2.0)?;
        let k4 = rhs(&axpy(&xs, h, &k3), t + h)?;
        xs = xs
            .iter()
            .enumerate()
            .map(|(j, x)| x + (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0))
            .collect();
        t = cfg0.t + h * n as f64;
        let (s, next_v) = sample(&xs, t, ev).map_err(|e| Error::MarginViolation { t, source: Box::new(e) })?;
        if s.gap > limit {
            return Err(Error::LocusDrift { t, gap: s.gap, limit });
        }
        sink(&s);
        v = next_v;
    }
    Ok(PoleConfig { xs, t })
}

/// [`integrate_flow_with`] collecting every sample.
pub fn integrate_flow(
    cfg0: &PoleConfig,
    t_end: f64,
    dt: f64,
    opts: &FlowOptions,
    ev: &ThetaEvaluator,
) -> Result<Vec<FlowSample>> {
    let mut out = Vec::new();
    integrate_flow_with(cfg0, t_end, dt, opts, ev, |s| out.push(s.clone()))?;
    Ok(out)
}

/// Damped Gauss-Newton on the locus residuals with `x₁ = 0` pinned, started from random
/// perturbations of the degenerate configuration. Converged points closer than `1e-3`
/// (relative margin) to a collision or to the boundary are discarded. Deterministic
/// for a given `seed`; success is not guaranteed.
pub fn find_locus_seed(ell: usize, ev: &ThetaEvaluator, seed: u64, attempts: usize) -> Result<PoleConfig> {
    let m = ell * (ell + 1) / 2;
    if m < 2 {
        return Ok(degenerate_config(ell.max(1), ev.eta()));
    }
    let base = degenerate_config(ell, ev.eta()).xs;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..attempts {
        let mut xs: Vec<C64> = base
            .iter()
            .map(|b| b + C64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)))
            .collect();
        let x0 = xs[0];
        for x in xs.iter_mut() {
            *x -= x0;
        }
        if let Some((cfg, r)) = gauss_newton(xs, ev) {
            if r < 1e-12 && margin(&cfg, ev).is_ok_and(|mg| mg > 1e-3) {
                return Ok(PoleConfig::new(cfg));
            }
            best = best.min(r);
        }
    }
    Err(Error::NoLocusSeed { attempts, best })
}

fn residual_vec(xs: &[C64], ev: &ThetaEvaluator) -> Option<(Vec<C64>, f64)> {
    let r = locus_residual(xs, ev).ok()?;
    r.max_norm.is_finite().then_some((r.residuals, r.max_norm))
}

fn gauss_newton(mut xs: Vec<C64>, ev: &ThetaEvaluator) -> Option<(Vec<C64>, f64)> {
    let m = xs.len();
    let (mut r, mut norm) = residual_vec(&xs, ev)?;
    for _ in 0..100 {
        if norm < 1e-14 {
            break;
        }
        let mut jac = CMatrix::zeros(m, m - 1);
        for c in 1..m {
            let h = 1e-7;
            let mut p = xs.clone();
            let mut q = xs.clone();
            p[c] += h;
            q[c] -= h;
            let (rp, _) = residual_vec(&p, ev)?;
            let (rq, _) = residual_vec(&q, ev)?;
            for row in 0..m {
                jac[(row, c - 1)] = (rp[row] - rq[row]) / (2.0 * h);
            }
        }
        let rhs = CMatrix::from_iterator(m, 1, r.iter().map(|z| -z));
        let step = jac.svd(true, true).solve(&rhs, 1e-14).ok()?;
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..=8 {
            let mut trial = xs.clone();
            for c in 1..m {
                trial[c] += step[(c - 1, 0)] * lambda;
            }
            if let Some((tr, tn)) = residual_vec(&trial, ev) {
                if tn < norm {
                    xs = trial;
                    r = tr;
                    norm = tn;
                    moved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Some((xs, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::EllipticParams;

    fn ev() -> ThetaEvaluator {
        ThetaEvaluator::new(EllipticParams::with_default_tol(C64::new(0.0, 1.2), C64::new(0.17, 0.0)).unwrap()).unwrap()
    }

    #[test]
    fn degenerate_configs() {
        let eta = C64::new(0.17, 0.0);
        assert_eq!(degenerate_config(1, eta).xs, vec![C64::new(0.0, 0.0)]);
        let xs = degenerate_config(2, eta).xs;
        assert_eq!(xs.len(), 3);
        for want in [eta, C64::new(0.0, 0.0), -eta] {
            assert!(xs.iter().any(|x| (x - want).norm() < 1e-15));
        }
    }

    #[test]
    fn single_pole_speed() {
        let e = ev();
        let v = pole_rhs(&[C64::new(0.1, 0.05)], &e).unwrap();
        let want = e.theta1(2.0 * e.eta()) / e.theta1_prime(C64::new(0.0, 0.0));
        assert!((v.first[0] - want).norm() < 1e-15);
        assert_eq!(v.gap(), 0.0);
        assert!(locus_residual(&[C64::new(0.1, 0.0)], &e).unwrap().residuals[0].norm() < 1e-15);
    }

    #[test]
    fn degenerate_ell2_is_boundary() {
        let e = ev();
        let xs = degenerate_config(2, e.eta()).xs;
        let err = locus_residual(&xs, &e).unwrap_err();
        assert!(matches!(err, Error::LocusBoundary { .. }), "{err}");
        assert!(err.to_string().contains("boundary of locus"));
    }

    #[test]
    fn coincident_poles_rejected() {
        let e = ev();
        let x = C64::new(0.2, 0.1);
        assert!(matches!(margin(&[x, x + 1.0], &e), Err(Error::CoincidentPoles { .. })));
    }

    #[test]
    fn constant_coefficient_is_fixed_point() {
        let e = ev();
        assert_eq!(volterra_rhs_c(&[], C64::new(0.3, 0.1), &e).unwrap(), C64::new(0.0, 0.0));
    }
}
