//! Jacobi theta functions θ₁..θ₄ of one complex variable.
//!
//! Conventions (with `q = exp(πiτ)`):
//!
//! ```text
//! θ₁(x|τ) = -Σ_k exp(πiτ(k+½)² + 2πi(x+½)(k+½))
//! θ₂(x|τ) =  Σ_k exp(πiτ(k+½)² + 2πi x(k+½))
//! θ₃(x|τ) =  Σ_k exp(πiτk² + 2πi xk)
//! θ₄(x|τ) =  Σ_k exp(πiτk² + 2πi(x+½)k)
//! ```
//!
//! so that `θ₁(x) = 2 sin(πx) e^{πiτ/4} + …`, θ₁ is odd and
//! `θ₁(x+1) = -θ₁(x)`, `θ₁(x+τ) = -e^{-πiτ-2πix} θ₁(x)`.
//!
//! The series are summed over a window of `2N+1` consecutive indices centred on the
//! dominant term, where `N` is the smallest integer with `|q|^{N²} < 10⁻²·tol`.
//! Centring the window keeps the truncation error relative to the peak term even for
//! large `|Im x|`, so no argument reduction is needed for accuracy.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Global context: modular parameter, lattice spacing and tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticParams {
    pub tau: C64,
    pub eta: C64,
    pub tol: f64,
}

impl EllipticParams {
    pub const DEFAULT_TOL: f64 = 1e-12;

    pub fn new(tau: C64, eta: C64, tol: f64) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::NonPositiveImTau { tau });
        }
        if eta == C64::new(0.0, 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!("eta must be finite and nonzero, got {eta}")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
        }
        Ok(Self { tau, eta, tol })
    }

    pub fn with_default_tol(tau: C64, eta: C64) -> Result<Self> {
        Self::new(tau, eta, Self::DEFAULT_TOL)
    }
}

/// Half periods used by the shift identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPeriod {
    /// 1/2
    Real,
    /// τ/2
    Tau,
    /// (1+τ)/2
    Both,
}

impl HalfPeriod {
    pub fn value(self, tau: C64) -> C64 {
        match self {
            HalfPeriod::Real => C64::new(0.5, 0.0),
            HalfPeriod::Tau => tau * 0.5,
            HalfPeriod::Both => (tau + 1.0) * 0.5,
        }
    }
}

/// Value of θ₁ at a shifted point computed two ways.
#[derive(Debug, Clone, Copy)]
pub struct HalfShift {
    pub direct: C64,
    pub via_identity: C64,
}

/// Immutable theta-function evaluator for a fixed [`EllipticParams`].
#[derive(Debug, Clone)]
pub struct ThetaEvaluator {
    params: EllipticParams,
    nome: C64,
    cutoff: usize,
    // |θ₁′(0)|: zero-proximity tests compare |θ₁(x)| against tol times this
    scale: f64,
}

impl ThetaEvaluator {
    pub fn new(params: EllipticParams) -> Result<Self> {
        let nome = (I * PI * params.tau).exp();
        let q = nome.norm();
        if !(q < 1.0) {
            return Err(Error::NonPositiveImTau { tau: params.tau });
        }
        // |q|^{N²} < 1e-2·tol
        let target = (1e-2 * params.tol).ln();
        let mut n = 1usize;
        while ((n * n) as f64) * q.ln() >= target {
            n += 1;
        }
        let mut ev = Self { params, nome, cutoff: n, scale: 1.0 };
        ev.scale = ev.theta1_prime(C64::new(0.0, 0.0)).norm();
        Ok(ev)
    }

    /// Evaluator with an explicit series cutoff, used to probe truncation stability.
    pub fn with_cutoff(params: EllipticParams, cutoff: usize) -> Result<Self> {
        let mut ev = Self::new(params)?;
        ev.cutoff = cutoff.max(1);
        Ok(ev)
    }

    pub fn params(&self) -> &EllipticParams {
        &self.params
    }

    pub fn tau(&self) -> C64 {
        self.params.tau
    }

    pub fn eta(&self) -> C64 {
        self.params.eta
    }

    pub fn tol(&self) -> f64 {
        self.params.tol
    }

    pub fn nome(&self) -> C64 {
        self.nome
    }

    pub fn series_cutoff(&self) -> usize {
        self.cutoff
    }

    /// `|θ₁′(0)|`. Near a zero `x₀` of θ₁, `|θ₁(x)|/scale ≈ |x - x₀|`, so this is the
    /// reference for every "θ₁ vanishes" test; it keeps the tests meaningful when
    /// `|q|^{1/4}` is tiny.
    pub fn theta1_scale(&self) -> f64 {
        self.scale
    }

    /// True when `|θ₁(x)|` counts as zero.
    pub fn is_theta1_zero(&self, value: C64) -> bool {
        value.norm() < self.params.tol * self.scale
    }

    /// Sums `Σ_n (2πi n)^d exp(πiτ n² + 2πi y n)` over `n = k + offset` in the window
    /// around the dominant index.
    fn sum(&self, y: C64, offset: f64, deriv: u32) -> C64 {
        let tau = self.params.tau;
        let centre = (-y.im / tau.im - offset).round() as i64;
        let n_max = self.cutoff as i64;
        let mut acc = C64::new(0.0, 0.0);
        for k in (centre - n_max)..=(centre + n_max) {
            let n = k as f64 + offset;
            let term = (I * PI * (tau * n * n + 2.0 * y * n)).exp();
            acc += match deriv {
                0 => term,
                d => term * (I * 2.0 * PI * n).powu(d),
            };
        }
        acc
    }

    pub fn theta1(&self, x: C64) -> C64 {
        -self.sum(x + 0.5, 0.5, 0)
    }

    pub fn theta2(&self, x: C64) -> C64 {
        self.sum(x, 0.5, 0)
    }

    pub fn theta3(&self, x: C64) -> C64 {
        self.sum(x, 0.0, 0)
    }

    pub fn theta4(&self, x: C64) -> C64 {
        self.sum(x + 0.5, 0.0, 0)
    }

    /// θ_a(x) for `a ∈ {1,2,3,4}`.
    pub fn theta(&self, a: usize, x: C64) -> Result<C64> {
        match a {
            1 => Ok(self.theta1(x)),
            2 => Ok(self.theta2(x)),
            3 => Ok(self.theta3(x)),
            4 => Ok(self.theta4(x)),
            _ => Err(Error::InvalidParameter(format!("theta index must be 1..=4, got {a}"))),
        }
    }

    /// θ₁′(x) from the term-wise differentiated series.
    pub fn theta1_prime(&self, x: C64) -> C64 {
        -self.sum(x + 0.5, 0.5, 1)
    }

    /// θ₁″(x) from the term-wise differentiated series.
    pub fn theta1_second(&self, x: C64) -> C64 {
        -self.sum(x + 0.5, 0.5, 2)
    }

    /// θ₁(x), failing when `|θ₁(x)| < tol·|θ₁′(0)|`. Used for every division by θ₁.
    pub fn theta1_nonzero(&self, x: C64) -> Result<C64> {
        let v = self.theta1(x);
        if self.is_theta1_zero(v) {
            Err(Error::PoleProximity { at: x, magnitude: v.norm() })
        } else {
            Ok(v)
        }
    }

    /// θ_a(x) evaluated after reducing `x` to the fundamental cell with the period
    /// relations `θ_a(x+1) = (-1)^{δa1+δa2} θ_a(x)` and
    /// `θ_a(x+τ) = (-1)^{δa1+δa4} e^{-πiτ-2πix} θ_a(x)`.
    pub fn theta_reduced(&self, a: usize, x: C64) -> Result<C64> {
        let tau = self.params.tau;
        let n = (x.im / tau.im).round();
        let shifted = x - tau * n;
        let m = shifted.re.round();
        let r = shifted - m;
        let base = self.theta(a, r)?;
        let one_sign = if a == 1 || a == 2 { (-1f64).powi(m as i32) } else { 1.0 };
        let tau_sign = if a == 1 || a == 4 { (-1f64).powi(n as i32) } else { 1.0 };
        // θ(r + nτ) = s^n exp(-πi n² τ - 2πi n r) θ(r)
        let phase = (-I * PI * (tau * n * n + 2.0 * n * r)).exp();
        Ok(base * one_sign * tau_sign * phase)
    }

    /// θ₁(x + sign·shift) computed directly and through the half-period identities
    ///
    /// ```text
    /// θ₁(x ± ½)       = ±θ₂(x)
    /// θ₁(x ± τ/2)     = ±i e^{-πiτ/4 ∓ πix} θ₄(x)
    /// θ₁(x ± (1+τ)/2) = ± e^{-πiτ/4 ∓ πix} θ₃(x)
    /// ```
    ///
    /// The two values must agree to `10·tol` relative to their size.
    pub fn theta_halfshift(&self, x: C64, shift: HalfPeriod, sign: i32) -> Result<HalfShift> {
        let s = if sign >= 0 { 1.0 } else { -1.0 };
        let tau = self.params.tau;
        let direct = self.theta1(x + shift.value(tau) * s);
        let via_identity = match shift {
            HalfPeriod::Real => self.theta2(x) * s,
            HalfPeriod::Tau => {
                I * s * (-I * PI * tau / 4.0 - I * PI * x * s).exp() * self.theta4(x)
            }
            HalfPeriod::Both => s * (-I * PI * tau / 4.0 - I * PI * x * s).exp() * self.theta3(x),
        };
        let scale = direct.norm().max(via_identity.norm()).max(1.0);
        let error = (direct - via_identity).norm() / scale;
        if error > 10.0 * self.params.tol {
            return Err(Error::SeriesMismatch { what: "half-period shift", error });
        }
        Ok(HalfShift { direct, via_identity })
    }

    /// `-d²/dx² log θ₁(x|τ)`, i.e. ℘(x | ½, τ/2) with no additive constant.
    pub fn weierstrass_p(&self, x: C64) -> Result<C64> {
        let t = self.theta1_nonzero(x)?;
        let t1 = self.theta1_prime(x);
        let t2 = self.theta1_second(x);
        Ok((t1 * t1 - t * t2) / (t * t))
    }
}
