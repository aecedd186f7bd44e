//! The spectral curve: A-polynomials, the two curve equations, band edges, the
//! relation between ζ and the Bloch factor K, and Newton solves for curve points.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lame::{residual_relative, residual_scaled, CurvePoint, LameContext};
use crate::linalg::{det, solve, CMatrix, CVector};
use crate::numbers::{qnumber, Brackets};
use crate::poly::{cluster, EPoly, Root};
use crate::theta::ThetaEvaluator;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn sign(j: i64) -> f64 {
    if j.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `A_j(E)` for `j = 0..=ℓ` (index = j) from the downward recurrence
///
/// ```text
/// A_ℓ = 1,  A_{ℓ-1} = [ℓ]/[2ℓ] E,
/// A_{ℓ-s-1} = [ℓ-s]/[2ℓ-s] E A_{ℓ-s} + [s]/[2ℓ-s] A_{ℓ-s+1}
/// ```
pub fn a_polys_recurrence(ctx: &LameContext) -> Result<Vec<EPoly>> {
    let l = ctx.ell();
    if l == 0 {
        return Ok(vec![EPoly::constant(C64::new(1.0, 0.0))]);
    }
    let li = l as i64;
    let br = |n: i64| ctx.br(n);
    let mut a = vec![EPoly::zero(); l + 1];
    a[l] = EPoly::constant(C64::new(1.0, 0.0));
    a[l - 1] = EPoly::monomial(br(li) / br(2 * li), 1);
    for s in 1..li {
        let den = br(2 * li - s);
        let up = a[(li - s) as usize].shift_up().scaled(br(li - s) / den);
        let back = a[(li - s + 1) as usize].scaled(br(s) / den);
        a[(li - s - 1) as usize] = &up + &back;
    }
    Ok(a)
}

/// `A_{ℓ-s}(E)` from the tridiagonal determinant
///
/// ```text
/// [ℓ choose s]/[2ℓ choose s] det(E δ_ij + [-i]/[ℓ+1-i] δ_{i,j-1} + [2ℓ+2-i]/[ℓ+1-i] δ_{i,j+1})
/// ```
///
/// with `i, j = 1..s`.
pub fn a_polys_determinant(s: usize, e: C64, ctx: &LameContext) -> Result<C64> {
    let l = ctx.ell();
    if s > l {
        return Err(Error::InvalidParameter(format!("s={s} exceeds ell={l}")));
    }
    let li = l as i64;
    let br = |n: i64| ctx.br(n);
    let mut m = CMatrix::zeros(s, s);
    for i in 1..=s as i64 {
        let row = (i - 1) as usize;
        m[(row, row)] = e;
        if i < s as i64 {
            m[(row, row + 1)] = br(-i) / br(li + 1 - i);
        }
        if i > 1 {
            m[(row, row - 1)] = br(2 * li + 2 - i) / br(li + 1 - i);
        }
    }
    let b = ctx.brackets();
    Ok(b.binom_or_zero(l, s as i64) / b.binom_or_zero(2 * l, s as i64) * det(&m))
}

/// Values of the two curve equations with their term-magnitude scales:
///
/// ```text
/// S₁ = Σ_{j=0..ℓ}   (-1)^j K^{-j} θ₁(ζ-jη) [ℓ choose j] A_j(E)
/// S₂ = Σ_{j=0..ℓ+1} (-1)^j K^{-j} θ₁(ζ-jη) [j-1] [ℓ+1 choose j] A_{|j-1|}(E)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveEquations {
    pub first: C64,
    pub second: C64,
    pub first_scale: f64,
    pub second_scale: f64,
}

impl CurveEquations {
    pub fn relative(&self) -> f64 {
        let r = |v: C64, s: f64| if s == 0.0 { 0.0 } else { v.norm() / s };
        r(self.first, self.first_scale).max(r(self.second, self.second_scale))
    }
}

pub fn curve_equations(pt: &CurvePoint, ctx: &LameContext) -> Result<CurveEquations> {
    let l = ctx.ell();
    if l == 0 {
        return Err(Error::InvalidParameter("spectral curve needs ell >= 1".into()));
    }
    if pt.k.norm() == 0.0 {
        return Err(Error::InvalidParameter("K must be nonzero".into()));
    }
    let a = a_polys_recurrence(ctx)?;
    let b = ctx.brackets();
    let eta = ctx.eta();
    let kinv = pt.k.inv();
    let weight = |j: i64| sign(j) * kinv.powi(j as i32) * ctx.ev().theta1(pt.zeta - eta * j as f64);
    let mut out = CurveEquations { first: zero(), second: zero(), first_scale: 0.0, second_scale: 0.0 };
    for j in 0..=l as i64 {
        let t = weight(j) * b.binom_or_zero(l, j) * a[j as usize].eval(pt.e);
        out.first += t;
        out.first_scale += t.norm();
    }
    for j in 0..=(l as i64 + 1) {
        let t = weight(j) * b.get(j - 1) * b.binom_or_zero(l + 1, j) * a[(j - 1).unsigned_abs() as usize].eval(pt.e);
        out.second += t;
        out.second_scale += t.norm();
    }
    Ok(out)
}

/// Half period `ω_a` attached to the label `a`: `0, ½, (1+τ)/2, τ/2`.
pub fn omega(a: usize, tau: C64) -> C64 {
    match a {
        1 => zero(),
        2 => C64::new(0.5, 0.0),
        3 => (tau + 1.0) * 0.5,
        _ => tau * 0.5,
    }
}

/// The two E-polynomials whose common roots are the edges with label `a`; they are
/// the curve equations at `ζ = Nη + ω_a` with `θ₁(ζ-jη)K^{-j}` replaced by `θ_a((N-j)η)`.
pub fn edge_polynomials(a: usize, ctx: &LameContext) -> Result<(EPoly, EPoly)> {
    let l = ctx.ell();
    if l == 0 {
        return Err(Error::InvalidParameter("band edges need ell >= 1".into()));
    }
    let n = ctx.n() as i64;
    let eta = ctx.eta();
    let b = ctx.brackets();
    let apol = a_polys_recurrence(ctx)?;
    let mut p1 = EPoly::zero();
    let mut p2 = EPoly::zero();
    for j in 0..=(l as i64 + 1) {
        let w = sign(j) * ctx.ev().theta(a, eta * (n - j) as f64)?;
        if j <= l as i64 {
            p1 = &p1 + &apol[j as usize].scaled(w * b.binom_or_zero(l, j));
        }
        p2 = &p2 + &apol[(j - 1).unsigned_abs() as usize].scaled(w * b.get(j - 1) * b.binom_or_zero(l + 1, j));
    }
    Ok((p1, p2))
}

/// Edges carrying one label `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelEdges {
    pub label: usize,
    pub roots: Vec<Root>,
    /// Count predicted for generic η.
    pub expected: usize,
    /// The second polynomial vanished identically, so only the first one was used.
    pub second_vanishes: bool,
}

/// Band edges grouped by half-period label, plus the full set `{±E_i}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandEdgeSet {
    pub ell: usize,
    pub labels: Vec<LabelEdges>,
    pub union_with_reflection: Vec<C64>,
}

impl BandEdgeSet {
    /// The `2ℓ+1` edges `E_i` (one representative of each `±` pair), multiplicities
    /// expanded.
    pub fn edges(&self) -> Vec<C64> {
        self.labels
            .iter()
            .flat_map(|l| l.roots.iter().flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity)))
            .collect()
    }

    pub fn counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for l in &self.labels {
            c[l.label - 1] = l.roots.iter().map(|r| r.multiplicity).sum();
        }
        c
    }

    pub fn expected_counts(&self) -> [usize; 4] {
        expected_counts(self.ell)
    }

    /// True when a label has clustered roots or a count differs from the generic one.
    pub fn ambiguous(&self) -> bool {
        self.counts() != self.expected_counts()
            || self.labels.iter().any(|l| l.roots.iter().any(|r| r.multiplicity > 1))
    }

    pub fn label(&self, a: usize) -> &[Root] {
        &self.labels[a - 1].roots
    }

    /// `∏_i (E² - E_i²)`.
    pub fn branch_product(&self, e: C64) -> C64 {
        self.edges().iter().map(|ei| e * e - ei * ei).product()
    }
}

/// Generic edge counts per label.
pub fn expected_counts(ell: usize) -> [usize; 4] {
    if ell % 2 == 1 {
        let o = (ell + 1) / 2;
        [(ell - 1) / 2, o, o, o]
    } else {
        [ell / 2 + 1, ell / 2, ell / 2, ell / 2]
    }
}

// Relative size below which the second edge polynomial counts as identically zero.
const VANISHING_POLY: f64 = 1e-10;
// Leading coefficients below this fraction of the common scale are dropped.
const TRIM: f64 = 1e-12;
// A root of the first polynomial is common when |P₂(r)| is below this fraction of Σ|c_k||r|^k.
const COMMON_ROOT: f64 = 1e-8;
/// Roots of one label closer than this fraction of `max(1, |E|)` are one cluster.
pub const CLUSTER_RADIUS: f64 = 1e-7;

/// Common roots of the two edge polynomials for each label.
pub fn band_edges(ctx: &LameContext) -> Result<BandEdgeSet> {
    let l = ctx.ell();
    let expected = expected_counts(l);
    let mut labels = Vec::with_capacity(4);
    for a in 1..=4 {
        let (p1, p2) = edge_polynomials(a, ctx)?;
        let scale = p1.scale().max(p2.scale());
        let second_vanishes = p2.scale() < VANISHING_POLY * scale;
        let first_vanishes = p1.scale() < VANISHING_POLY * scale;
        let (base, other) = match (first_vanishes, second_vanishes) {
            (false, true) => (p1, None),
            (true, false) => (p2, None),
            _ => (p1, Some(p2)),
        };
        let base = base.trimmed(TRIM * scale);
        let mut roots = base.roots()?;
        if let Some(other) = other {
            roots.retain(|&r| other.eval(r).norm() < COMMON_ROOT * other.eval_scale(r));
        }
        let radius = CLUSTER_RADIUS * roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
        labels.push(LabelEdges { label: a, roots: cluster(&roots, radius), expected: expected[a - 1], second_vanishes });
    }
    let mut union_with_reflection = Vec::new();
    for lab in &labels {
        for r in &lab.roots {
            union_with_reflection.push(r.value);
            union_with_reflection.push(-r.value);
        }
    }
    Ok(BandEdgeSet { ell: l, labels, union_with_reflection })
}

/// Edge values for ℓ = 1 in closed form, indexed by label `a = α+1`:
/// `E_α = 2 θ_{β+1}(η)θ_{γ+1}(η)/(θ_{β+1}(0)θ_{γ+1}(0))` for cyclic `(α, β, γ)`.
pub fn closed_form_ell1(ev: &ThetaEvaluator) -> Result<[(usize, C64); 3]> {
    let eta = ev.eta();
    let z = zero();
    let e = |b: usize, g: usize| -> Result<C64> {
        Ok(2.0 * ev.theta(b + 1, eta)? * ev.theta(g + 1, eta)? / (ev.theta(b + 1, z)? * ev.theta(g + 1, z)?))
    };
    Ok([(2, e(2, 3)?), (3, e(3, 1)?), (4, e(1, 2)?)])
}

/// Closed-form data for ℓ = 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ell2ClosedForm {
    /// Roots of `[2]E² + [2]³E + 2[4] = 0`.
    pub quadratic_roots: [C64; 2],
    /// `½([2]² ± √([2]⁴ - 8[4]/[2]))`.
    pub displayed_roots: [C64; 2],
    /// `θ₁(2η)θ_a(2η)/(θ₁(η)θ_a(η))` for `a = 2, 3, 4`.
    pub single: [(usize, C64); 3],
}

pub fn closed_form_ell2(ev: &ThetaEvaluator) -> Result<Ell2ClosedForm> {
    let b = Brackets::new(ev, 4)?;
    let (b2, b4) = (b.get(2), b.get(4));
    // [2]E² + [2]³E + 2[4]
    let (qa, qb, qc) = (b2, b2 * b2 * b2, 2.0 * b4);
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    let quadratic_roots = [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)];
    let d2 = (b2.powi(4) - 8.0 * b4 / b2).sqrt();
    let displayed_roots = [0.5 * (b2 * b2 + d2), 0.5 * (b2 * b2 - d2)];
    let eta = ev.eta();
    let t1 = |x: C64| ev.theta1(x);
    let single = |a: usize| -> Result<(usize, C64)> {
        Ok((a, t1(2.0 * eta) * ev.theta(a, 2.0 * eta)? / (t1(eta) * ev.theta(a, eta)?)))
    };
    Ok(Ell2ClosedForm { quadratic_roots, displayed_roots, single: [single(2)?, single(3)?, single(4)?] })
}

/// Curve points over the band edges: `ζ = Nη + ω_a`, `K = 1` (a = 1, 2) or
/// `K = e^{πiη}` (a = 3, 4), and the reflected points `(ζ, -K, -E)`.
pub fn edge_points(edges: &BandEdgeSet, ctx: &LameContext) -> Vec<(usize, CurvePoint)> {
    let eta = ctx.eta();
    let base = eta * ctx.n() as f64;
    let mut out = Vec::new();
    for lab in &edges.labels {
        let a = lab.label;
        let zeta = base + omega(a, ctx.tau());
        let k = if a <= 2 { C64::new(1.0, 0.0) } else { (PI * I * eta).exp() };
        for r in &lab.roots {
            let p = CurvePoint::new(zeta, k, r.value);
            out.push((a, p));
            out.push((a, p.reflect()));
        }
    }
    out
}

/// `C_j`, `j = 0..N`: sum over subsets `J ⊆ {1..ℓ}` with `Σ J = j` of
/// `∏_{k∈J, k'∉J} [k+k']/[|k-k'|]`.
pub fn curve_coeffs(ctx: &LameContext) -> Vec<C64> {
    let l = ctx.ell();
    let n = ctx.n();
    let mut c = vec![zero(); n + 1];
    for mask in 0u64..(1u64 << l) {
        let inside = |k: usize| mask & (1 << (k - 1)) != 0;
        let mut p = C64::new(1.0, 0.0);
        let mut sum = 0;
        for k in (1..=l).filter(|&k| inside(k)) {
            sum += k;
            for kp in (1..=l).filter(|&kp| !inside(kp)) {
                p *= ctx.br((k + kp) as i64) / ctx.br((k as i64 - kp as i64).abs());
            }
        }
        c[sum] += p;
    }
    c
}

/// `Σ_{j=0..N} (-1)^j C_j θ₁(ζ-2jη) K^{2(N-j)}` and its term-magnitude scale.
pub fn bloch_relation_scaled(zeta: C64, k: C64, ctx: &LameContext) -> (C64, f64) {
    let c = curve_coeffs(ctx);
    let n = ctx.n();
    let eta = ctx.eta();
    let mut value = zero();
    let mut scale = 0.0;
    for (j, cj) in c.iter().enumerate() {
        let t = sign(j as i64) * cj * ctx.ev().theta1(zeta - eta * (2 * j) as f64) * k.powi(2 * (n - j) as i32);
        value += t;
        scale += t.norm();
    }
    (value, scale)
}

pub fn bloch_relation(zeta: C64, k: C64, ctx: &LameContext) -> C64 {
    bloch_relation_scaled(zeta, k, ctx).0
}

/// `θ₁(ζ) det(K^{2m}δ_mn + G_mn)` with
/// `G_mn = (-1)^{ℓ+1} θ₁(2mη) ∏_{j≠m} θ₁((m+j)η)/θ₁((m-j)η) Φ(-(m+n)η, ζ)`;
/// equals [`bloch_relation`].
pub fn bloch_relation_det(zeta: C64, k: C64, ctx: &LameContext) -> Result<C64> {
    let l = ctx.ell();
    let eta = ctx.eta();
    let ev = ctx.ev();
    let t1 = |x: C64| ev.theta1(x);
    let mut m = CMatrix::zeros(l, l);
    let s = sign(l as i64 + 1);
    for mi in 1..=l {
        let mut pr = s * t1(eta * (2 * mi) as f64);
        for j in (1..=l).filter(|&j| j != mi) {
            pr *= t1(eta * (mi + j) as f64) / ev.theta1_nonzero(eta * (mi as f64 - j as f64))?;
        }
        for ni in 1..=l {
            let g = pr * crate::lame::phi(-eta * (mi + ni) as f64, zeta, ev)?;
            m[(mi - 1, ni - 1)] = g;
        }
        m[(mi - 1, mi - 1)] += k.powi(2 * mi as i32);
    }
    Ok(t1(zeta) * det(&m))
}

/// Both sides of the elliptic Cauchy determinant
///
/// ```text
/// det(θ₁(x_i+x_j+ζ)/θ₁(x_i+x_j)) =
///   θ₁(ζ)^{n-1} θ₁(ζ+2Σx)/∏θ₁(2x_i) ∏_{i<j} θ₁²(x_i-x_j)/θ₁²(x_i+x_j)
/// ```
pub fn cauchy_det(xs: &[C64], zeta: C64, ev: &ThetaEvaluator) -> Result<(C64, C64)> {
    let n = xs.len();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = ev.theta1(xs[i] + xs[j] + zeta) / ev.theta1_nonzero(xs[i] + xs[j])?;
        }
    }
    let lhs = det(&m);
    let total: C64 = xs.iter().sum();
    let mut rhs = ev.theta1(zeta).powi(n as i32 - 1) * ev.theta1(zeta + 2.0 * total);
    for x in xs {
        rhs /= ev.theta1_nonzero(2.0 * x)?;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            rhs *= (ev.theta1(xs[i] - xs[j]) / ev.theta1_nonzero(xs[i] + xs[j])?).powi(2);
        }
    }
    Ok((lhs, rhs))
}

/// Both sides of the trigonometric subset identity
///
/// ```text
/// Σ_{J ⊆ {1..ℓ}} z^{ΣJ} ∏_{k∈J, k'∉J} (k+k')_q/(|k-k'|)_q = ∏_{1≤j≤k≤ℓ} (1 + z q^{j+k-ℓ-1})
/// ```
pub fn weyl_denominator_check(ell: usize, z: C64, q: C64) -> Result<(C64, C64)> {
    let mut lhs = zero();
    for mask in 0u64..(1u64 << ell) {
        let inside = |k: usize| mask & (1 << (k - 1)) != 0;
        let mut p = C64::new(1.0, 0.0);
        for k in (1..=ell).filter(|&k| inside(k)) {
            p *= z.powi(k as i32);
            for kp in (1..=ell).filter(|&kp| !inside(kp)) {
                let den = qnumber((k as i64 - kp as i64).abs(), q)?;
                if den.norm() < 1e-14 {
                    return Err(Error::InvalidParameter("q-number vanishes; q is a low-order root of unity".into()));
                }
                p *= qnumber((k + kp) as i64, q)? / den;
            }
        }
        lhs += p;
    }
    let mut rhs = C64::new(1.0, 0.0);
    for j in 1..=ell {
        for k in j..=ell {
            rhs *= 1.0 + z * q.powi((j + k) as i32 - ell as i32 - 1);
        }
    }
    Ok((lhs, rhs))
}

/// Which coordinate stays fixed in a Newton solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fix {
    /// Solve for `(K, E)` at fixed ζ.
    Zeta(C64),
    /// Solve for `(ζ, K)` at fixed E.
    E(C64),
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Target for the relative residual.
    pub tol: f64,
    /// A stalled iteration is accepted if the relative residual is below this.
    pub accept: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-14, accept: 1e-11 }
    }
}

fn unpack(fix: Fix, v: [C64; 2]) -> CurvePoint {
    match fix {
        Fix::Zeta(z) => CurvePoint::new(z, v[0], v[1]),
        Fix::E(e) => CurvePoint::new(v[0], v[1], e),
    }
}

fn pack(fix: Fix, p: &CurvePoint) -> [C64; 2] {
    match fix {
        Fix::Zeta(_) => [p.k, p.e],
        Fix::E(_) => [p.zeta, p.k],
    }
}

fn normalized_residual(p: &CurvePoint, ctx: &LameContext) -> Result<[C64; 2]> {
    let (a, b) = residual_scaled(p, ctx)?;
    Ok([a.value, b.value])
}

/// Damped Newton iteration on `(det M⁽⁰⁾, det M⁽¹⁾)` in the two free coordinates.
/// The Jacobian uses central differences (both determinants are holomorphic in each
/// coordinate). Steps are halved up to 8 times while the relative residual grows.
pub fn solve_curve_point(fix: Fix, seed: &CurvePoint, opts: &NewtonOptions, ctx: &LameContext) -> Result<CurvePoint> {
    let mut v = pack(fix, seed);
    let mut p = unpack(fix, v);
    let mut r = residual_relative(&p, ctx)?;
    for _ in 0..opts.max_iter {
        if r < opts.tol {
            return Ok(p);
        }
        let f = normalized_residual(&p, ctx)?;
        let mut jac = CMatrix::zeros(2, 2);
        for c in 0..2 {
            let h = 1e-7 * v[c].norm().max(1.0);
            let mut vp = v;
            let mut vm = v;
            vp[c] += h;
            vm[c] -= h;
            let fp = normalized_residual(&unpack(fix, vp), ctx)?;
            let fm = normalized_residual(&unpack(fix, vm), ctx)?;
            for row in 0..2 {
                jac[(row, c)] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        let jdet = det(&jac);
        let jscale = jac.norm().powi(2);
        if jdet.norm() <= 1e-14 * jscale || jscale == 0.0 {
            return Err(Error::SingularJacobian { det: jdet.norm() });
        }
        let step = solve(&jac, &CVector::from_vec(vec![-f[0], -f[1]]))
            .ok_or(Error::SingularJacobian { det: jdet.norm() })?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=8 {
            let trial = [v[0] + step[0] * lambda, v[1] + step[1] * lambda];
            let tp = unpack(fix, trial);
            if let Ok(tr) = residual_relative(&tp, ctx) {
                if tr.is_finite() && tr < r {
                    accepted = Some((trial, tp, tr));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, tp, tr)) => {
                v = trial;
                p = tp;
                r = tr;
            }
            None if r < opts.accept => return Ok(p),
            None => return Err(Error::NoConvergence { iterations: opts.max_iter, residual: r }),
        }
    }
    if r < opts.accept {
        Ok(p)
    } else {
        Err(Error::NoConvergence { iterations: opts.max_iter, residual: r })
    }
}

/// Coefficients (increasing degree) of a polynomial of degree ≤ d from its values at
/// `R ω^m`, `ω = e^{2πi/(d+1)}`.
fn interpolate_on_circle<F: Fn(C64) -> Result<C64>>(f: F, d: usize, radius: f64) -> Result<EPoly> {
    let n = d + 1;
    let nodes: Vec<C64> = (0..n).map(|m| C64::from_polar(radius, 2.0 * PI * m as f64 / n as f64)).collect();
    let values = nodes.iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
    let coeffs = (0..n)
        .map(|k| {
            let s: C64 = (0..n)
                .map(|m| values[m] * C64::from_polar(1.0, -2.0 * PI * (m * k) as f64 / n as f64))
                .sum();
            s / (n as f64 * radius.powi(k as i32))
        })
        .collect();
    Ok(EPoly::new(coeffs))
}

/// All curve points over a fixed ζ: `K² = u` runs over the roots of the Bloch relation
/// (a polynomial of degree N in u), and for each `K = ±√u` the eigenvalue is the root
/// of `det M⁽⁰⁾(E)` (degree ℓ) that also annihilates `det M⁽¹⁾`, polished by Newton.
pub fn fiber_points(zeta: C64, ctx: &LameContext) -> Result<Vec<CurvePoint>> {
    let l = ctx.ell();
    if l == 0 {
        return Err(Error::InvalidParameter("spectral curve needs ell >= 1".into()));
    }
    let n = ctx.n();
    let c = curve_coeffs(ctx);
    let eta = ctx.eta();
    // coefficient of u^{N-j} is (-1)^j C_j θ₁(ζ-2jη)
    let mut coeffs = vec![zero(); n + 1];
    for (j, cj) in c.iter().enumerate() {
        coeffs[n - j] = sign(j as i64) * cj * ctx.ev().theta1(zeta - eta * (2 * j) as f64);
    }
    let poly = EPoly::new(coeffs);
    let us = poly.trimmed(1e-14 * poly.scale()).roots()?;
    let opts = NewtonOptions::default();
    let mut out: Vec<CurvePoint> = Vec::new();
    for u in us {
        for k in [u.sqrt(), -u.sqrt()] {
            if k.norm() < 1e-12 {
                continue;
            }
            let radius = 2.0 + k.norm() + k.norm().recip();
            let det0 = interpolate_on_circle(
                |e| Ok(residual_scaled(&CurvePoint::new(zeta, k, e), ctx)?.0.value),
                l,
                radius,
            )?;
            let es = det0.trimmed(1e-13 * det0.scale()).roots()?;
            let best = es
                .into_iter()
                .filter_map(|e| {
                    let p = CurvePoint::new(zeta, k, e);
                    residual_scaled(&p, ctx).ok().map(|(_, b)| (p, b.relative()))
                })
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((seed, _)) = best else { continue };
            let Ok(p) = solve_curve_point(Fix::Zeta(zeta), &seed, &opts, ctx) else { continue };
            let dup = out
                .iter()
                .any(|q| (q.k - p.k).norm() + (q.e - p.e).norm() < 1e-8 * (1.0 + p.k.norm() + p.e.norm()));
            if !dup {
                out.push(p);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::EllipticParams;

    fn ctx_at(ell: usize, eta: C64, tau: C64) -> LameContext {
        let p = EllipticParams::with_default_tol(tau, eta).unwrap();
        LameContext::new(ell, ThetaEvaluator::new(p).unwrap()).unwrap()
    }

    fn ctx(ell: usize) -> LameContext {
        ctx_at(ell, C64::new(0.17, 0.0), C64::new(0.0, 1.2))
    }

    #[test]
    fn recurrence_initial_conditions() {
        let c = ctx(3);
        let a = a_polys_recurrence(&c).unwrap();
        assert_eq!(a[3].coeffs, vec![C64::new(1.0, 0.0)]);
        let want = c.br(3) / c.br(6);
        assert!((a[2].coeffs[1] - want).norm() < 1e-15);
        assert_eq!(a[2].coeffs[0], zero());
    }

    #[test]
    fn determinant_formula_small_cases() {
        let c = ctx(2);
        let e = C64::new(0.4, -0.3);
        assert!((a_polys_determinant(0, e, &c).unwrap() - 1.0).norm() < 1e-15);
        let a = a_polys_recurrence(&c).unwrap();
        assert!((a_polys_determinant(1, e, &c).unwrap() - a[1].eval(e)).norm() < 1e-12);
        assert!(a_polys_determinant(3, e, &c).is_err());
    }

    #[test]
    fn ell1_edges_and_empty_first_label() {
        let c = ctx(1);
        let edges = band_edges(&c).unwrap();
        assert!(edges.label(1).is_empty());
        assert_eq!(edges.counts(), [0, 1, 1, 1]);
        for (a, want) in closed_form_ell1(c.ev()).unwrap() {
            let got = edges.label(a)[0].value;
            assert!((got - want).norm() < 1e-9 * want.norm(), "a={a}: {got} vs {want}");
        }
    }

    #[test]
    fn counts_follow_parity_rule() {
        for ell in 1..=4 {
            let e = band_edges(&ctx(ell)).unwrap();
            assert_eq!(e.counts(), expected_counts(ell), "ell={ell}");
            assert_eq!(e.edges().len(), 2 * ell + 1);
        }
        assert_eq!(expected_counts(3), [1, 2, 2, 2]);
        assert_eq!(expected_counts(2), [2, 1, 1, 1]);
    }

    #[test]
    fn curve_coefficients_trivial_cases() {
        let c = ctx(1);
        let cc = curve_coeffs(&c);
        assert_eq!(cc, vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let c4 = curve_coeffs(&ctx(4));
        assert_eq!(c4[0], C64::new(1.0, 0.0));
        assert_eq!(c4.len(), 11);
    }

    #[test]
    fn cauchy_single_entry() {
        let c = ctx(1);
        let x = C64::new(0.13, 0.07);
        let z = C64::new(0.23, 0.1);
        let (l, r) = cauchy_det(&[x], z, c.ev()).unwrap();
        let want = c.ev().theta1(2.0 * x + z) / c.ev().theta1(2.0 * x);
        assert!((l - want).norm() < 1e-14 && (r - want).norm() < 1e-13);
    }

    #[test]
    fn weyl_trivial_cases() {
        let q = C64::from_polar(1.0, 0.46);
        let (l, r) = weyl_denominator_check(3, zero(), q).unwrap();
        assert!((l - 1.0).norm() < 1e-15 && (r - 1.0).norm() < 1e-15);
        let z = C64::new(0.7, 0.2);
        let (l, r) = weyl_denominator_check(1, z, q).unwrap();
        assert!((l - (1.0 + z)).norm() < 1e-15 && (r - (1.0 + z)).norm() < 1e-15);
    }

    #[test]
    fn fiber_points_lie_on_curve() {
        for ell in 1..=3 {
            let c = ctx(ell);
            let z = C64::new(0.31, 0.22);
            let pts = fiber_points(z, &c).unwrap();
            assert!(!pts.is_empty(), "ell={ell}");
            for p in &pts {
                assert!(residual_relative(p, &c).unwrap() < 1e-10);
                let (v, s) = bloch_relation_scaled(p.zeta, p.k, &c);
                assert!(v.norm() < 1e-8 * s, "ell={ell}: {}", v.norm() / s);
            }
        }
    }
}
