//! The difference Lamé operators, the double-Bloch ansatz and the linear system whose
//! solvability cuts out the spectral curve.
//!
//! Two gauges of the same operator appear:
//!
//! ```text
//! (LΨ)(x) = θ₁(x-ℓη)/θ₁(x) Ψ(x+η) + θ₁(x+ℓη)/θ₁(x) Ψ(x-η)
//! (L̃ψ)(x) = ψ(x+η) + θ₁(x+ℓη)θ₁(x-(ℓ+1)η)/(θ₁(x)θ₁(x-η)) ψ(x-η)
//! ```
//!
//! related by `Ψ = f ψ` with `f(x) = ∏_{j=1..ℓ} θ₁(x-jη)`. Eigenfunctions of L̃ are
//! sought as `ψ(x) = K^{x/η} Σ_j s_j Φ(x-jη, ζ)` with `Φ(x,ζ) = θ₁(x+ζ)/(θ₁(x)θ₁(ζ))`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{delete_row, det, smallest_right_singular, CMatrix};
use crate::numbers::Brackets;
use crate::theta::ThetaEvaluator;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Operator order ℓ together with the theta evaluator and bracket table it needs.
#[derive(Debug, Clone)]
pub struct LameContext {
    ell: usize,
    ev: ThetaEvaluator,
    brackets: Brackets,
}

impl LameContext {
    /// `ell = 0` is accepted (free operator); everything curve-related needs `ell ≥ 1`.
    pub fn new(ell: usize, ev: ThetaEvaluator) -> Result<Self> {
        let brackets = Brackets::for_ell(&ev, ell)?;
        Ok(Self { ell, ev, brackets })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Genus `N = ℓ(ℓ+1)/2`.
    pub fn n(&self) -> usize {
        self.ell * (self.ell + 1) / 2
    }

    pub fn ev(&self) -> &ThetaEvaluator {
        &self.ev
    }

    pub fn eta(&self) -> C64 {
        self.ev.eta()
    }

    pub fn tau(&self) -> C64 {
        self.ev.tau()
    }

    pub fn brackets(&self) -> &Brackets {
        &self.brackets
    }

    pub fn br(&self, n: i64) -> C64 {
        self.brackets.get(n)
    }

    fn t1(&self, x: C64) -> C64 {
        self.ev.theta1(x)
    }

    fn t1nz(&self, x: C64) -> Result<C64> {
        self.ev.theta1_nonzero(x)
    }

    fn require_curve(&self) -> Result<()> {
        if self.ell == 0 {
            return Err(Error::InvalidParameter("spectral curve needs ell >= 1".into()));
        }
        Ok(())
    }
}

/// A point `(ζ, K, E)` of the spectral curve, or a candidate for one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub zeta: C64,
    pub k: C64,
    pub e: C64,
}

impl CurvePoint {
    pub fn new(zeta: C64, k: C64, e: C64) -> Self {
        Self { zeta, k, e }
    }

    /// `B₁ = K^{1/η}` on the principal branch of `log K`.
    pub fn b1(&self, eta: C64) -> C64 {
        (self.k.ln() / eta).exp()
    }

    /// `B_τ = K^{τ/η} e^{-2πiζ}` on the principal branch of `log K`.
    pub fn btau(&self, eta: C64, tau: C64) -> C64 {
        (self.k.ln() * tau / eta - 2.0 * PI * I * self.zeta).exp()
    }

    /// `(ζ+τ, K e^{2πiη}, E)`, which describes the same Bloch solution.
    pub fn shift_tau(&self, eta: C64, tau: C64) -> Self {
        Self::new(self.zeta + tau, self.k * (2.0 * PI * I * eta).exp(), self.e)
    }

    /// `(ζ, -K, -E)`.
    pub fn reflect(&self) -> Self {
        Self::new(self.zeta, -self.k, -self.e)
    }

    /// Hyperelliptic involution `(2Nη-ζ, K⁻¹, E)`.
    pub fn involution(&self, n: usize, eta: C64) -> Self {
        Self::new(eta * (2 * n) as f64 - self.zeta, self.k.inv(), self.e)
    }
}

/// Null vector `s` of the `(ℓ+1)×ℓ` system, largest entry normalised to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochCoeffs {
    pub s: Vec<C64>,
    /// Singular values of M, descending.
    pub singular_values: Vec<f64>,
}

/// `Φ(x, ζ) = θ₁(ζ+x)/(θ₁(x)θ₁(ζ))`.
pub fn phi(x: C64, zeta: C64, ev: &ThetaEvaluator) -> Result<C64> {
    Ok(ev.theta1(zeta + x) / (ev.theta1_nonzero(x)? * ev.theta1_nonzero(zeta)?))
}

/// `(LΨ)(x)`.
pub fn apply_l<F: Fn(C64) -> C64>(psi: F, x: C64, ctx: &LameContext) -> Result<C64> {
    let eta = ctx.eta();
    let l = ctx.ell as f64;
    let d = ctx.t1nz(x)?;
    Ok((ctx.t1(x - eta * l) * psi(x + eta) + ctx.t1(x + eta * l) * psi(x - eta)) / d)
}

/// Coefficient of `ψ(x-η)` in L̃.
pub fn ltilde_coefficient(x: C64, ctx: &LameContext) -> Result<C64> {
    let eta = ctx.eta();
    let l = ctx.ell as f64;
    let num = ctx.t1(x + eta * l) * ctx.t1(x - eta * (l + 1.0));
    Ok(num / (ctx.t1nz(x)? * ctx.t1nz(x - eta)?))
}

/// `(L̃ψ)(x)`.
pub fn apply_ltilde<F: Fn(C64) -> C64>(psi: F, x: C64, ctx: &LameContext) -> Result<C64> {
    let eta = ctx.eta();
    Ok(psi(x + eta) + ltilde_coefficient(x, ctx)? * psi(x - eta))
}

/// Gauge factor `f(x) = ∏_{j=1..ℓ} θ₁(x-jη)` with `L f = f L̃`.
pub fn gauge(x: C64, ctx: &LameContext) -> C64 {
    (1..=ctx.ell).map(|j| ctx.t1(x - ctx.eta() * j as f64)).product()
}

/// The `(ℓ+1)×ℓ` matrix `M_ij`, rows `i = 0..ℓ`, columns `j = 1..ℓ` (stored at `j-1`):
///
/// ```text
/// M_ij = K δ_{i,j-1} - E δ_ij
///      + K⁻¹ θ₁((j+ℓ+1)η)θ₁((j-ℓ)η)/(θ₁((j+1)η)θ₁(jη)) δ_{i,j+1}
///      + K⁻¹ θ₁(ζ-(j-i+1)η)/θ₁(ζ) θ₁((i+ℓ)η)θ₁((i-ℓ-1)η)/(θ₁(η)θ₁((j-i+1)η)) (δ_{i0} - δ_{i1})
/// ```
pub fn build_m(pt: &CurvePoint, ctx: &LameContext) -> Result<CMatrix> {
    Ok(build_m_with_scale(pt, ctx)?.0)
}

/// M together with the entrywise sums of term magnitudes, which measure how much
/// cancellation an entry has suffered.
pub fn build_m_with_scale(pt: &CurvePoint, ctx: &LameContext) -> Result<(CMatrix, DMatrix<f64>)> {
    ctx.require_curve()?;
    let l = ctx.ell;
    let eta = ctx.eta();
    let at = |n: i64| eta * n as f64;
    let tz = ctx.t1nz(pt.zeta)?;
    let t_eta = ctx.t1nz(eta)?;
    if pt.k.norm() == 0.0 {
        return Err(Error::InvalidParameter("K must be nonzero".into()));
    }
    let kinv = pt.k.inv();
    let li = l as i64;
    let mut m = CMatrix::zeros(l + 1, l);
    let mut scale = DMatrix::<f64>::zeros(l + 1, l);
    for i in 0..=li {
        for j in 1..=li {
            let mut terms = [C64::new(0.0, 0.0); 4];
            if i == j - 1 {
                terms[0] = pt.k;
            }
            if i == j {
                terms[1] = -pt.e;
            }
            if i == j + 1 {
                terms[2] = kinv * ctx.t1(at(j + li + 1)) * ctx.t1(at(j - li))
                    / (ctx.t1nz(at(j + 1))? * ctx.t1nz(at(j))?);
            }
            let sign = match i {
                0 => 1.0,
                1 => -1.0,
                _ => 0.0,
            };
            if sign != 0.0 {
                let d = j - i + 1;
                terms[3] = kinv * sign * ctx.t1(pt.zeta - at(d)) / tz * ctx.t1(at(i + li)) * ctx.t1(at(i - li - 1))
                    / (t_eta * ctx.t1nz(at(d))?);
            }
            let (r, c) = (i as usize, (j - 1) as usize);
            m[(r, c)] = terms.iter().sum();
            scale[(r, c)] = terms.iter().map(|t| t.norm()).sum();
        }
    }
    Ok((m, scale))
}

/// Determinant together with the Hadamard bound `∏ ‖row‖` of the term-magnitude
/// matrix, which bounds it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledDet {
    pub value: C64,
    pub scale: f64,
}

impl ScaledDet {
    pub fn of(m: &CMatrix, terms: &DMatrix<f64>) -> Self {
        let scale = (0..terms.nrows()).map(|r| terms.row(r).norm()).product::<f64>();
        Self { value: det(m), scale }
    }

    /// `|det| / scale ∈ [0, 1]`.
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.value.norm() / self.scale
        }
    }
}

/// `(det M⁽⁰⁾, det M⁽¹⁾)`: M with row 0, respectively row 1, deleted.
pub fn residual(pt: &CurvePoint, ctx: &LameContext) -> Result<(C64, C64)> {
    let (a, b) = residual_scaled(pt, ctx)?;
    Ok((a.value, b.value))
}

/// Like [`residual`] but with the Hadamard scales attached.
pub fn residual_scaled(pt: &CurvePoint, ctx: &LameContext) -> Result<(ScaledDet, ScaledDet)> {
    let (m, s) = build_m_with_scale(pt, ctx)?;
    Ok((
        ScaledDet::of(&delete_row(&m, 0), &s.clone().remove_row(0)),
        ScaledDet::of(&delete_row(&m, 1), &s.remove_row(1)),
    ))
}

/// Largest relative residual component; small means "on the curve".
pub fn residual_relative(pt: &CurvePoint, ctx: &LameContext) -> Result<f64> {
    let (a, b) = residual_scaled(pt, ctx)?;
    Ok(a.relative().max(b.relative()))
}

/// Threshold on `σ_min/‖T‖_F` above which M is considered to have no null vector, where
/// T holds the magnitudes of the terms summed into each entry. Measuring against the
/// terms rather than `σ_max` keeps the test meaningful when M has a single column.
pub const NULL_RATIO_LIMIT: f64 = 1e-6;

/// Null vector of M from its smallest singular direction.
pub fn solve_bloch_coeffs(pt: &CurvePoint, ctx: &LameContext) -> Result<BlochCoeffs> {
    let (m, terms) = build_m_with_scale(pt, ctx)?;
    let (sv, v) = smallest_right_singular(&m)?;
    let ratio = sv.last().copied().unwrap_or(0.0) / terms.norm().max(f64::MIN_POSITIVE);
    if ratio > NULL_RATIO_LIMIT {
        return Err(Error::NotOnCurve { ratio });
    }
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or_else(|| Error::Eigen("empty null vector".into()))?;
    Ok(BlochCoeffs { s: v.iter().map(|z| z / pivot).collect(), singular_values: sv })
}

fn k_power(pt: &CurvePoint, x: C64, eta: C64) -> C64 {
    (x / eta * pt.k.ln()).exp()
}

/// `ψ(x) = K^{x/η} Σ_j s_j Φ(x-jη, ζ)`; `K^{x/η}` on the principal branch.
pub fn build_psi(pt: &CurvePoint, coeffs: &BlochCoeffs, x: C64, ctx: &LameContext) -> Result<C64> {
    let eta = ctx.eta();
    let mut acc = C64::new(0.0, 0.0);
    for (j, s) in coeffs.s.iter().enumerate() {
        acc += s * phi(x - eta * (j + 1) as f64, pt.zeta, ctx.ev())?;
    }
    Ok(k_power(pt, x, eta) * acc)
}

/// `Ψ(x) = f(x) ψ(x)`, evaluated in the pole-free form
/// `K^{x/η} Σ_m s_m θ₁(ζ+x-mη)/θ₁(ζ) ∏_{j≠m} θ₁(x-jη)`.
pub fn build_big_psi(pt: &CurvePoint, coeffs: &BlochCoeffs, x: C64, ctx: &LameContext) -> Result<C64> {
    let eta = ctx.eta();
    let tz = ctx.t1nz(pt.zeta)?;
    let l = ctx.ell;
    let factors: Vec<C64> = (1..=l).map(|j| ctx.t1(x - eta * j as f64)).collect();
    let mut acc = C64::new(0.0, 0.0);
    for m in 1..=l {
        let others: C64 = (1..=l).filter(|&j| j != m).map(|j| factors[j - 1]).product();
        acc += coeffs.s[m - 1] * ctx.t1(pt.zeta + x - eta * m as f64) / tz * others;
    }
    Ok(k_power(pt, x, eta) * acc)
}

/// `(WΨ)(x)` for the commuting operator
///
/// ```text
/// W = φ_ℓ(x) Σ_{k=0..2ℓ+1} (-1)^k [2ℓ+1 choose k] θ₁(x+(2ℓ-2k+1)η)
///       / (∏_{j=0..2ℓ-k+1} θ₁(x+jη) ∏_{j'=1..k} θ₁(x-j'η)) e^{(2ℓ-2k+1)η∂ₓ}
/// ```
///
/// with `φ_ℓ(x) = ∏_{j=0..2ℓ} θ₁(x+(j-ℓ)η)`.
pub fn apply_w<F: Fn(C64) -> C64>(psi: F, x: C64, ctx: &LameContext) -> Result<C64> {
    let l = ctx.ell as i64;
    let eta = ctx.eta();
    let at = |n: i64| x + eta * n as f64;
    let prefactor: C64 = (0..=2 * l).map(|j| ctx.t1(at(j - l))).product();
    let mut total = C64::new(0.0, 0.0);
    for k in 0..=(2 * l + 1) {
        let mut den = C64::new(1.0, 0.0);
        for j in 0..=(2 * l - k + 1) {
            den *= ctx.t1nz(at(j))?;
        }
        for jp in 1..=k {
            den *= ctx.t1nz(at(-jp))?;
        }
        let shift = 2 * l - 2 * k + 1;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let binom = ctx.brackets().binom_or_zero((2 * l + 1) as usize, k);
        total += sign * binom * ctx.t1(at(shift)) / den * psi(at(shift));
    }
    Ok(prefactor * total)
}

/// Eigenvalue of W on Ψ, with the relative spread of the sampled ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WEigenvalue {
    pub w: C64,
    pub spread: f64,
    pub samples: usize,
}

fn halton(index: usize, base: usize) -> f64 {
    let (mut f, mut r, mut i) = (1.0, 0.0, index);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Ratio `(WΨ)(x)/Ψ(x)` sampled at 10 Halton points of the period cell, skipping
/// points near zeros of the W denominators or of Ψ. Returns the sample closest to all
/// others (medoid) and the spread `max|r - w| / max(|w|, 1)`. A spread above
/// `max_spread` means Ψ is not a joint eigenfunction.
pub fn w_eigenvalue(pt: &CurvePoint, coeffs: &BlochCoeffs, max_spread: f64, ctx: &LameContext) -> Result<WEigenvalue> {
    let tau = ctx.tau();
    let eta = ctx.eta();
    let l = ctx.ell as i64;
    let ev = ctx.ev();
    let big_psi = |x: C64| build_big_psi(pt, coeffs, x, ctx);
    let mut ratios = Vec::with_capacity(10);
    let mut index = 1;
    while ratios.len() < 10 && index < 200 {
        let x = C64::new(halton(index, 2) - 0.5, 0.0) + tau * (halton(index, 3) - 0.5);
        index += 1;
        let near_zero = (-(l + 1)..=(2 * l + 2)).any(|j| {
            let v = ev.theta1(x + eta * j as f64);
            v.norm() < 1e-3 * ev.theta1_scale()
        });
        if near_zero {
            continue;
        }
        let denom = big_psi(x)?;
        let reference = (-(2 * l + 1)..=(2 * l + 1))
            .map(|s| big_psi(x + eta * s as f64).map(|v| v.norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if denom.norm() < 1e-6 * reference {
            continue;
        }
        ratios.push(apply_w(big_psi_unwrap(pt, coeffs, ctx), x, ctx)? / denom);
    }
    if ratios.is_empty() {
        return Err(Error::InconsistentRatios { spread: f64::INFINITY });
    }
    let w = *ratios
        .iter()
        .min_by(|a, b| {
            let sa: f64 = ratios.iter().map(|r| (*a - r).norm()).sum();
            let sb: f64 = ratios.iter().map(|r| (*b - r).norm()).sum();
            sa.total_cmp(&sb)
        })
        .expect("nonempty");
    let spread = ratios.iter().map(|r| (r - w).norm()).fold(0.0, f64::max) / w.norm().max(1.0);
    if spread > max_spread {
        return Err(Error::InconsistentRatios { spread });
    }
    Ok(WEigenvalue { w, spread, samples: ratios.len() })
}

fn big_psi_unwrap<'a>(
    pt: &'a CurvePoint,
    coeffs: &'a BlochCoeffs,
    ctx: &'a LameContext,
) -> impl Fn(C64) -> C64 + 'a {
    // Ψ only divides by θ₁(ζ), which was checked when the ratio denominator was formed
    move |x| build_big_psi(pt, coeffs, x, ctx).unwrap_or(C64::new(f64::NAN, f64::NAN))
}

/// Joint eigenfunction data at a curve point: coefficients and the W eigenvalue.
pub fn w_at(pt: &CurvePoint, max_spread: f64, ctx: &LameContext) -> Result<(BlochCoeffs, WEigenvalue)> {
    let coeffs = solve_bloch_coeffs(pt, ctx)?;
    let w = w_eigenvalue(pt, &coeffs, max_spread, ctx)?;
    Ok((coeffs, w))
}

/// Continuum-limit defect of L̃ at lattice spacing η on `u(x) = e^{2πix}`:
///
/// ```text
/// D(x) = [2u(x) - (L̃u)(x+τ/2)]/(η² u(x)) - 4π² - ℓ(ℓ+1)℘(x+τ/2)
/// ```
///
/// where the shifted operator acts on u through `u(x±η)`. As `η → 0`, D tends to a
/// constant; returns the fitted constant (mean of D) and `max|D - mean|`, which is O(η).
pub fn continuum_limit_defect(ell: usize, eta: f64, tau: C64, xs: &[C64]) -> Result<(C64, f64)> {
    let ev = ThetaEvaluator::new(crate::theta::EllipticParams::new(tau, C64::new(eta, 0.0), 1e-14)?)?;
    let ctx = LameContext::new(ell, ev)?;
    let half = tau * 0.5;
    let u = |x: C64| (2.0 * PI * I * x).exp();
    let l = ell as f64;
    let defects = xs
        .iter()
        .map(|&x| {
            let shifted = apply_ltilde(|y: C64| u(y - half), x + half, &ctx)?;
            let lhs = (2.0 * u(x) - shifted) / (eta * eta * u(x));
            Ok(lhs - 4.0 * PI * PI - l * (l + 1.0) * ctx.ev().weierstrass_p(x + half)?)
        })
        .collect::<Result<Vec<C64>>>()?;
    let mean = defects.iter().sum::<C64>() / defects.len().max(1) as f64;
    let spread = defects.iter().map(|d| (d - mean).norm()).fold(0.0, f64::max);
    Ok((mean, spread))
}
