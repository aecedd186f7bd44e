//! Finite-matrix oracle for rational `η = P/Q`.
//!
//! On the lattice `x_n = x₀ + nη` the coefficients are `Q`-periodic, so Bloch solutions
//! `Ψ_{n+Q} = e^{iθ} Ψ_n` are eigenvectors of a `Q×Q` periodic tridiagonal matrix with the
//! phase on the two corner entries. Band edges are the simple eigenvalues at `e^{iθ} = ±1`;
//! closed gaps show up as degenerate pairs.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, CMatrix};
use crate::theta::ThetaEvaluator;
use crate::volterra::c_from_poles;

/// `η = P/Q` in lowest terms with `Q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RationalEta {
    pub p: i64,
    pub q: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl RationalEta {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q <= 0 {
            return Err(Error::InvalidParameter(format!("denominator must be positive, got {q}")));
        }
        if p == 0 {
            return Err(Error::InvalidParameter("eta must be nonzero".into()));
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidParameter(format!("{p}/{q} is not in lowest terms")));
        }
        Ok(Self { p, q })
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn as_complex(&self) -> C64 {
        C64::new(self.value(), 0.0)
    }
}

/// Operator whose lattice restriction is diagonalised.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    /// `a_n = θ₁(x_n-ℓη)/θ₁(x_n)`, `c_n = θ₁(x_n+ℓη)/θ₁(x_n)`.
    Lame { ell: usize },
    /// `a_n = 1`, `c_n = c(x_n)` with c built from the given poles.
    Poles { xs: Vec<C64> },
}

impl Coefficients {
    fn at(&self, x: C64, eta: C64, ev: &ThetaEvaluator) -> Result<(C64, C64)> {
        match self {
            Coefficients::Lame { ell } => {
                let d = ev.theta1(x);
                let l = *ell as f64;
                Ok((ev.theta1(x - eta * l) / d, ev.theta1(x + eta * l) / d))
            }
            Coefficients::Poles { xs } => Ok((C64::new(1.0, 0.0), c_from_poles(xs, x, ev)?)),
        }
    }

    // points whose θ₁ must stay away from zero for the coefficients to be finite
    fn critical_points(&self, x: C64, eta: C64) -> Vec<C64> {
        match self {
            Coefficients::Lame { .. } => vec![x],
            Coefficients::Poles { xs } => xs.iter().flat_map(|p| [x - p, x - eta - p]).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlochMatrix {
    pub matrix: CMatrix,
    pub x0: C64,
    pub phase: C64,
}

/// Relative size of `|θ₁|` below which a lattice point counts as a collision.
pub const COLLISION: f64 = 1e-8;
/// Number of `+1/(2Q)` reshifts tried before giving up.
pub const MAX_RESHIFTS: usize = 8;

/// Offset actually used: `x0` moved by `+1/(2Q)` until no lattice point collides.
pub fn collision_free_offset(coeffs: &Coefficients, re: RationalEta, x0: C64, ev: &ThetaEvaluator) -> Result<C64> {
    let eta = re.as_complex();
    let mut x = x0;
    for _ in 0..=MAX_RESHIFTS {
        let clear = (0..re.q).all(|n| {
            coeffs
                .critical_points(x + eta * n as f64, eta)
                .into_iter()
                .all(|y| ev.theta1(y).norm() >= COLLISION * ev.theta1_scale())
        });
        if clear {
            return Ok(x);
        }
        x += 0.5 / re.q as f64;
    }
    Err(Error::LatticeCollision { reshifts: MAX_RESHIFTS })
}

/// `Q×Q` matrix of `a_n Ψ_{n+1} + c_n Ψ_{n-1} = EΨ_n` with `Ψ_{n+Q} = phase·Ψ_n`.
/// The offset is used as given; see [`collision_free_offset`].
pub fn build_bloch_matrix(
    coeffs: &Coefficients,
    re: RationalEta,
    phase: C64,
    x0: C64,
    ev: &ThetaEvaluator,
) -> Result<BlochMatrix> {
    let q = re.q as usize;
    let eta = re.as_complex();
    let mut m = CMatrix::zeros(q, q);
    for n in 0..q {
        let (a, c) = coeffs.at(x0 + eta * n as f64, eta, ev)?;
        let up = (n + 1) % q;
        let down = (n + q - 1) % q;
        m[(n, up)] += if n == q - 1 { a * phase } else { a };
        m[(n, down)] += if n == 0 { c / phase } else { c };
    }
    Ok(BlochMatrix { matrix: m, x0, phase })
}

/// Bloch phase `e^{ikηQ}` for quasi-momentum k.
pub fn phase_of_k(k: f64, re: RationalEta) -> C64 {
    C64::from_polar(1.0, k * re.value() * re.q as f64)
}

/// Length of the Brillouin zone in k.
pub fn brillouin_period(re: RationalEta) -> f64 {
    2.0 * PI / (re.value() * re.q as f64).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    /// Nearest other eigenvalue is farther than `CONFIDENT·scale`.
    Confident,
    /// Between the degeneracy and confidence thresholds.
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeCandidate {
    pub value: C64,
    /// +1 for the periodic problem, -1 for the antiperiodic one.
    pub phase_sign: i32,
    pub separation: f64,
    pub confidence: Confidence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericEdges {
    pub candidates: Vec<EdgeCandidate>,
    pub x0: C64,
    /// Largest |E| among all periodic and antiperiodic eigenvalues.
    pub scale: f64,
    /// Largest |Im E| among them.
    pub max_imag: f64,
}

impl NumericEdges {
    pub fn confident(&self) -> Vec<C64> {
        self.candidates.iter().filter(|c| c.confidence == Confidence::Confident).map(|c| c.value).collect()
    }

    pub fn ambiguous_count(&self) -> usize {
        self.candidates.iter().filter(|c| c.confidence == Confidence::Ambiguous).count()
    }
}

/// Pairs closer than this fraction of the spectral radius are closed gaps.
pub const DEGENERATE: f64 = 1e-9;
/// Simple eigenvalues farther than this fraction from all others are confident edges.
pub const CONFIDENT: f64 = 1e-7;

/// Eigenvalues at phases +1 and -1, with degenerate pairs (closed gaps) removed.
pub fn numeric_band_edges(coeffs: &Coefficients, re: RationalEta, x0: C64, ev: &ThetaEvaluator) -> Result<NumericEdges> {
    let x0 = collision_free_offset(coeffs, re, x0, ev)?;
    let mut all: Vec<(C64, i32)> = Vec::new();
    for sign in [1, -1] {
        let m = build_bloch_matrix(coeffs, re, C64::new(sign as f64, 0.0), x0, ev)?;
        all.extend(eigenvalues(&m.matrix)?.into_iter().map(|e| (e, sign)));
    }
    let scale = all.iter().map(|(e, _)| e.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let max_imag = all.iter().map(|(e, _)| e.im.abs()).fold(0.0, f64::max);
    let mut candidates = Vec::new();
    for (i, &(e, s)) in all.iter().enumerate() {
        let separation = all
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, (f, _))| (e - f).norm())
            .fold(f64::INFINITY, f64::min);
        if separation < DEGENERATE * scale {
            continue;
        }
        let confidence = if separation > CONFIDENT * scale { Confidence::Confident } else { Confidence::Ambiguous };
        candidates.push(EdgeCandidate { value: e, phase_sign: s, separation, confidence });
    }
    Ok(NumericEdges { candidates, x0, scale, max_imag })
}

/// Eigenvalue curves over a k grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSweep {
    pub k: Vec<f64>,
    /// `energies[m]` are the Q eigenvalues at `k[m]`, sorted by real part.
    pub energies: Vec<Vec<C64>>,
    /// Maximal intervals of the real axis covered by the real parts of the bands.
    pub stable_intervals: Vec<(f64, f64)>,
    pub max_imag: f64,
    /// Some sorted trajectory jumped by more than a mean level spacing between grid
    /// points, so band labels may be mixed up.
    pub mislabeled: bool,
    pub x0: C64,
}

/// `count` equally spaced k values over one Brillouin zone, starting at k = 0 (phase +1).
/// An odd count is rounded up so that phase -1 is sampled too.
pub fn default_k_grid(re: RationalEta, count: usize) -> Vec<f64> {
    let n = (count.max(2) + 1) / 2 * 2;
    let period = brillouin_period(re);
    (0..n).map(|m| period * m as f64 / n as f64).collect()
}

/// Band structure over `k_grid`. Parallel over k when the `parallel` feature is on.
pub fn band_sweep(coeffs: &Coefficients, re: RationalEta, x0: C64, k_grid: &[f64], ev: &ThetaEvaluator) -> Result<BandSweep> {
    let x0 = collision_free_offset(coeffs, re, x0, ev)?;
    let at = |k: &f64| -> Result<Vec<C64>> {
        let m = build_bloch_matrix(coeffs, re, phase_of_k(*k, re), x0, ev)?;
        let mut e = eigenvalues(&m.matrix)?;
        e.sort_by(|a, b| a.re.total_cmp(&b.re));
        Ok(e)
    };
    #[cfg(feature = "parallel")]
    let energies: Vec<Vec<C64>> = {
        use rayon::prelude::*;
        k_grid.par_iter().map(at).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let energies: Vec<Vec<C64>> = k_grid.iter().map(at).collect::<Result<_>>()?;

    let q = re.q as usize;
    let max_imag = energies.iter().flatten().map(|e| e.im.abs()).fold(0.0, f64::max);
    let scale = energies.iter().flatten().map(|e| e.norm()).fold(0.0, f64::max);
    let spacing = 2.0 * scale / q as f64;
    let mislabeled = energies
        .windows(2)
        .any(|w| w[0].iter().zip(&w[1]).any(|(a, b)| (a - b).norm() > spacing));

    let mut bands: Vec<(f64, f64)> = (0..q)
        .map(|i| {
            energies.iter().map(|row| row[i].re).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
        })
        .collect();
    bands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let touch = CONFIDENT * scale.max(f64::MIN_POSITIVE);
    let mut stable_intervals: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in bands {
        match stable_intervals.last_mut() {
            Some(last) if lo <= last.1 + touch => last.1 = last.1.max(hi),
            _ => stable_intervals.push((lo, hi)),
        }
    }
    Ok(BandSweep { k: k_grid.to_vec(), energies, stable_intervals, max_imag, mislabeled, x0 })
}

impl BandSweep {
    /// Largest mismatch between the interval set and its mirror image under `E → -E`.
    pub fn reflection_error(&self) -> f64 {
        let n = self.stable_intervals.len();
        (0..n)
            .map(|i| {
                let (lo, hi) = self.stable_intervals[i];
                let (mlo, mhi) = self.stable_intervals[n - 1 - i];
                (lo + mhi).abs().max((hi + mlo).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    let one_way = |x: &[C64], y: &[C64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    one_way(a, b).max(one_way(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::EllipticParams;

    fn ev(re: RationalEta) -> ThetaEvaluator {
        ThetaEvaluator::new(EllipticParams::with_default_tol(C64::new(0.0, 1.2), re.as_complex()).unwrap()).unwrap()
    }

    #[test]
    fn rational_validation() {
        assert!(RationalEta::new(2, 4).is_err());
        assert!(RationalEta::new(1, 0).is_err());
        assert!(RationalEta::new(0, 5).is_err());
        assert_eq!(RationalEta::new(-2, 41).unwrap().value(), -2.0 / 41.0);
    }

    #[test]
    fn free_spectrum_is_cosine() {
        let re = RationalEta::new(1, 7).unwrap();
        let e = ev(re);
        let theta = 0.4;
        let m = build_bloch_matrix(&Coefficients::Lame { ell: 0 }, re, C64::from_polar(1.0, theta), C64::new(0.123456, 0.0), &e)
            .unwrap();
        let mut got: Vec<f64> = eigenvalues(&m.matrix).unwrap().iter().map(|z| z.re).collect();
        let mut want: Vec<f64> = (0..7).map(|k| 2.0 * ((2.0 * PI * k as f64 + theta) / 7.0).cos()).collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn free_row_sums() {
        let re = RationalEta::new(1, 5).unwrap();
        let m = build_bloch_matrix(&Coefficients::Lame { ell: 0 }, re, C64::new(1.0, 0.0), C64::new(0.1, 0.0), &ev(re)).unwrap();
        for r in 0..5 {
            assert!((m.matrix.row(r).sum() - 2.0).norm() < 1e-15);
        }
    }

    #[test]
    fn coefficients_repeat_after_a_period() {
        let re = RationalEta::new(2, 41).unwrap();
        let e = ev(re);
        let c = Coefficients::Lame { ell: 2 };
        let x = C64::new(0.123456, 0.0);
        let eta = re.as_complex();
        for n in [0, 5, 17] {
            let (a0, c0) = c.at(x + eta * n as f64, eta, &e).unwrap();
            let (a1, c1) = c.at(x + eta * (n + 41) as f64, eta, &e).unwrap();
            assert!((a0 - a1).norm() < 1e-12 && (c0 - c1).norm() < 1e-12);
        }
    }

    #[test]
    fn free_band_has_only_extreme_edges() {
        let re = RationalEta::new(1, 31).unwrap();
        let edges = numeric_band_edges(&Coefficients::Lame { ell: 0 }, re, C64::new(0.123456, 0.0), &ev(re)).unwrap();
        let mut v: Vec<f64> = edges.confident().iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        assert_eq!(v.len(), 2);
        assert!((v[0] + 2.0).abs() < 1e-12 && (v[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn collision_triggers_reshift() {
        let re = RationalEta::new(1, 31).unwrap();
        let e = ev(re);
        let x = collision_free_offset(&Coefficients::Lame { ell: 1 }, re, C64::new(0.0, 0.0), &e).unwrap();
        assert!((x - 0.5 / 31.0).norm() < 1e-15);
    }

    #[test]
    fn hausdorff_basics() {
        let a = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let b = [C64::new(0.0, 0.0), C64::new(1.5, 0.0)];
        assert!((hausdorff(&a, &b) - 0.5).abs() < 1e-15);
    }
}
