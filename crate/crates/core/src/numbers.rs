//! Elliptic integers `[n] = θ₁(nη)/θ₁(η)`, their factorials and binomials, and the
//! trigonometric q-numbers they degenerate to as `τ → i∞`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::theta::ThetaEvaluator;

/// Table of elliptic integers `[n]` for `|n| ≤ n_max`, built once and read-only after.
///
/// Every nonzero entry is checked against torsion: θ₁(nη) vanishing (relative to
/// `|θ₁′(0)|`) is an error.
#[derive(Debug, Clone)]
pub struct Brackets {
    n_max: i64,
    // values[n_max + n] = [n]
    values: Vec<C64>,
}

impl Brackets {
    pub fn new(ev: &ThetaEvaluator, n_max: usize) -> Result<Self> {
        let n_max = n_max.max(1) as i64;
        let eta = ev.eta();
        let t_eta = ev.theta1(eta);
        if ev.is_theta1_zero(t_eta) {
            return Err(Error::TorsionEta { n: 1, magnitude: t_eta.norm() });
        }
        let mut values = Vec::with_capacity((2 * n_max + 1) as usize);
        for n in -n_max..=n_max {
            if n == 0 {
                values.push(C64::new(0.0, 0.0));
                continue;
            }
            let t = ev.theta1(eta * n as f64);
            if ev.is_theta1_zero(t) {
                return Err(Error::TorsionEta { n, magnitude: t.norm() });
            }
            values.push(if n == 1 { C64::new(1.0, 0.0) } else { t / t_eta });
        }
        Ok(Self { n_max, values })
    }

    /// Table sized for operators of order `ell`: `|n| ≤ 4ℓ+2`.
    pub fn for_ell(ev: &ThetaEvaluator, ell: usize) -> Result<Self> {
        Self::new(ev, 4 * ell + 2)
    }

    pub fn n_max(&self) -> usize {
        self.n_max as usize
    }

    /// `[n]`; panics outside the table, which is a sizing bug in the caller.
    pub fn get(&self, n: i64) -> C64 {
        assert!(n.abs() <= self.n_max, "bracket [{n}] outside table of size {}", self.n_max);
        self.values[(self.n_max + n) as usize]
    }

    /// `[n]! = [1][2]…[n]`.
    pub fn factorial(&self, n: usize) -> C64 {
        (1..=n as i64).map(|j| self.get(j)).product()
    }

    /// Elliptic binomial `[n]!/([m]![n-m]!)`, zero outside `0 ≤ m ≤ n`.
    pub fn binom_or_zero(&self, n: usize, m: i64) -> C64 {
        if m < 0 || m > n as i64 {
            return C64::new(0.0, 0.0);
        }
        let m = m as usize;
        self.factorial(n) / (self.factorial(m) * self.factorial(n - m))
    }

    pub fn binom(&self, n: usize, m: i64) -> Result<C64> {
        if m < 0 || m > n as i64 {
            return Err(Error::InvalidParameter(format!("binomial index m={m} outside 0..={n}")));
        }
        Ok(self.binom_or_zero(n, m))
    }
}

/// `[n] = θ₁(nη)/θ₁(η)`, with `[0] = 0`.
pub fn ebracket(n: i64, ev: &ThetaEvaluator) -> Result<C64> {
    Ok(Brackets::new(ev, n.unsigned_abs() as usize)?.get(n))
}

/// `[n]! = ∏_{j=1..n} [j]`, with `[0]! = 1`.
pub fn efactorial(n: usize, ev: &ThetaEvaluator) -> Result<C64> {
    Ok(Brackets::new(ev, n)?.factorial(n))
}

/// Elliptic binomial coefficient; `m` must lie in `0..=n`.
pub fn ebinom(n: usize, m: i64, ev: &ThetaEvaluator) -> Result<C64> {
    Brackets::new(ev, n)?.binom(n, m)
}

/// Symmetric q-number `(j)_q = (h^j - h^{-j})/(h - h^{-1})` with `h = √q` (principal root).
pub fn qnumber(j: i64, q: C64) -> Result<C64> {
    let h = q.sqrt();
    let den = h - h.inv();
    if den.norm() < 1e-300 {
        return Err(Error::InvalidParameter("q-number with q = 1".into()));
    }
    Ok((h.powi(j as i32) - h.powi(-j as i32)) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::EllipticParams;
    use std::f64::consts::PI;

    fn ev(tau: f64, eta: f64) -> ThetaEvaluator {
        ThetaEvaluator::new(EllipticParams::with_default_tol(C64::new(0.0, tau), C64::new(eta, 0.0)).unwrap())
            .unwrap()
    }

    #[test]
    fn unit_and_oddness() {
        let e = ev(1.2, 0.17);
        assert_eq!(ebracket(1, &e).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(ebracket(0, &e).unwrap(), C64::new(0.0, 0.0));
        let b = Brackets::new(&e, 6).unwrap();
        for n in 1..=6 {
            assert!((b.get(-n) + b.get(n)).norm() < 1e-13);
        }
    }

    #[test]
    fn trigonometric_limit() {
        let e = ev(40.0, 0.2);
        let want = (3.0 * 0.2 * PI).sin() / (0.2 * PI).sin();
        assert!((ebracket(3, &e).unwrap() - want).norm() < 1e-6);
    }

    #[test]
    fn factorials() {
        let e = ev(1.2, 0.17);
        let b = Brackets::new(&e, 3).unwrap();
        assert_eq!(efactorial(0, &e).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(efactorial(1, &e).unwrap(), C64::new(1.0, 0.0));
        assert!((efactorial(3, &e).unwrap() - b.get(2) * b.get(3)).norm() < 1e-14);
    }

    #[test]
    fn binomial_symmetry_and_range() {
        let e = ev(1.1, 0.13);
        for n in 0..=8usize {
            assert!((ebinom(n, 0, &e).unwrap() - 1.0).norm() < 1e-14);
            assert!((ebinom(n, n as i64, &e).unwrap() - 1.0).norm() < 1e-12);
            for m in 0..=n as i64 {
                let d = ebinom(n, m, &e).unwrap() - ebinom(n, n as i64 - m, &e).unwrap();
                assert!(d.norm() < 1e-11);
            }
        }
        assert!(ebinom(3, 4, &e).is_err());
        assert!(ebinom(3, -1, &e).is_err());
    }

    #[test]
    fn binomial_matches_q_binomial_in_trigonometric_limit() {
        let eta = 0.1;
        let e = ev(40.0, eta);
        let q = C64::from_polar(1.0, 2.0 * PI * eta);
        let qf = |n: i64| (1..=n).map(|j| qnumber(j, q).unwrap()).product::<C64>();
        let want = qf(4) / (qf(2) * qf(2));
        assert!((ebinom(4, 2, &e).unwrap() - want).norm() < 1e-8);
    }

    #[test]
    fn torsion_is_rejected() {
        // η = 1/3: θ₁(3η) = θ₁(1) = 0
        let e = ev(1.2, 1.0 / 3.0);
        assert!(matches!(ebracket(3, &e), Err(Error::TorsionEta { .. })));
    }

    #[test]
    fn small_eta_limit_is_quadratic() {
        let d = |eta: f64| (ebracket(4, &ev(1.2, eta)).unwrap() - 4.0).norm();
        let r = d(1e-2) / d(1e-3);
        assert!((r - 100.0).abs() < 5.0, "ratio {r}");
    }
}
