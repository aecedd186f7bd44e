//! Polynomials in E with complex coefficients, monomial basis, increasing degree.

use std::ops::{Add, Mul};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{eigenvalues, CMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EPoly {
    pub coeffs: Vec<C64>,
}

/// Root together with the number of computed roots clustered onto it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: C64,
    pub multiplicity: usize,
}

impl EPoly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `c·E^k`.
    pub fn monomial(c: C64, k: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self { coeffs }
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops leading coefficients with magnitude below `tol` (absolute).
    pub fn trimmed(&self, tol: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() < tol) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Degree after exact trimming; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let t = self.trimmed(f64::MIN_POSITIVE);
        t.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, e: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * e + c)
    }

    /// `Σ |c_k| |e|^k`, the natural scale for `|p(e)|`.
    pub fn eval_scale(&self, e: C64) -> f64 {
        let r = e.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect(),
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    /// `E·p(E)`.
    pub fn shift_up(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(C64::new(0.0, 0.0));
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// All roots via companion-matrix eigenvalues, each refined by a few Newton steps.
    /// The polynomial must already be trimmed so its leading coefficient is meaningful.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let p = self.trimmed(f64::MIN_POSITIVE);
        let n = match p.degree() {
            None | Some(0) => return Ok(Vec::new()),
            Some(n) => n,
        };
        let lead = p.coeffs[n];
        let mut comp = CMatrix::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..n {
            comp[(i, n - 1)] = -p.coeffs[i] / lead;
        }
        let raw = eigenvalues(&comp)?;
        let dp = p.derivative();
        Ok(raw
            .into_iter()
            .map(|mut r| {
                for _ in 0..3 {
                    let d = dp.eval(r);
                    if d.norm() == 0.0 {
                        break;
                    }
                    let step = p.eval(r) / d;
                    let next = r - step;
                    if !next.is_finite() || p.eval(next).norm() > p.eval(r).norm() {
                        break;
                    }
                    r = next;
                }
                r
            })
            .collect())
    }
}

/// Groups values lying within `radius` of a cluster's first member (single linkage).
pub fn cluster(values: &[C64], radius: f64) -> Vec<Root> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<(usize, C64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match out.iter_mut().find(|(root, _, _)| *root == r) {
            Some(entry) => {
                entry.1 += values[i];
                entry.2 += 1;
            }
            None => out.push((r, values[i], 1)),
        }
    }
    out.into_iter()
        .map(|(_, sum, m)| Root { value: sum / m as f64, multiplicity: m })
        .collect()
}

impl Add for &EPoly {
    type Output = EPoly;
    fn add(self, rhs: &EPoly) -> EPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let z = C64::new(0.0, 0.0);
        EPoly {
            coeffs: (0..n)
                .map(|k| *self.coeffs.get(k).unwrap_or(&z) + *rhs.coeffs.get(k).unwrap_or(&z))
                .collect(),
        }
    }
}

impl Mul<C64> for &EPoly {
    type Output = EPoly;
    fn mul(self, s: C64) -> EPoly {
        self.scaled(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(r: f64) -> C64 {
        C64::new(r, 0.0)
    }

    #[test]
    fn roots_of_cubic() {
        // (E-1)(E+2)(E-i) = E³ + (1-i)E² + (-2-i)E + 2i
        let p = EPoly::new(vec![C64::new(0.0, 2.0), C64::new(-2.0, -1.0), C64::new(1.0, -1.0), c(1.0)]);
        let roots = p.roots().unwrap();
        for want in [c(1.0), c(-2.0), C64::new(0.0, 1.0)] {
            assert!(roots.iter().any(|r| (r - want).norm() < 1e-12), "{roots:?}");
        }
    }

    #[test]
    fn trim_and_degree() {
        let p = EPoly::new(vec![c(1.0), c(2.0), c(1e-20)]);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.trimmed(1e-15).degree(), Some(1));
        assert_eq!(EPoly::zero().degree(), None);
        assert!(EPoly::constant(c(3.0)).roots().unwrap().is_empty());
    }

    #[test]
    fn clustering_counts_multiplicity() {
        let v = [c(1.0), c(1.0 + 1e-9), c(2.0), c(1.0 - 1e-9)];
        let cl = cluster(&v, 1e-7);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl.iter().find(|r| (r.value - 1.0).norm() < 1e-6).unwrap().multiplicity, 3);
    }

    #[test]
    fn arithmetic() {
        let p = EPoly::new(vec![c(1.0), c(2.0)]);
        let q = p.shift_up();
        let s = &p + &q;
        assert_eq!(s.coeffs, vec![c(1.0), c(3.0), c(2.0)]);
        assert_eq!(s.eval(c(2.0)), c(15.0));
        assert_eq!((&p * c(2.0)).coeffs, vec![c(2.0), c(4.0)]);
    }
}
