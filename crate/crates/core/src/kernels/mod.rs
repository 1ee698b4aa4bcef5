//! The heat fundamental solution, its gradient, and exact time-slab integrals.
//!
//! For n = 2 every time integral of the kernel over a slab [a, b] has a
//! closed form in the exponential integral. With c = r²/4:
//!
//! ```text
//! ∫_a^b S ds          = (E1(c/b) − E1(c/a)) / 4π
//! ∫_a^b s S ds        = (F(b) − F(a)) / 4π,   F(s) = s e^{-c/s} − c E1(c/s)
//! ∫_a^b S/(2s) ds     = (e^{-c/b} − e^{-c/a}) / (2π r²)
//! ```
//!
//! The last one carries the time factor of the gradient, ∇S = −x/(2s) S.

mod expint;

pub use expint::{e1, ein, EULER_GAMMA};

use crate::error::{invalid, Result};
use crate::quadrature::gk;
use std::f64::consts::PI;

/// Spatial dimension of the heat kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelParams {
    dim: usize,
}

impl KernelParams {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return invalid(format!("kernel dimension must be >= 2, got {dim}"));
        }
        Ok(Self { dim })
    }

    pub fn planar() -> Self {
        Self { dim: 2 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn check_point(p: &KernelParams, t: f64, x: &[f64]) -> Result<f64> {
    if x.len() != p.dim {
        return invalid(format!("point has {} components, expected {}", x.len(), p.dim));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if t == 0.0 && r2 == 0.0 {
        return invalid("S is undefined at (t, x) = (0, 0)");
    }
    Ok(r2)
}

#[inline]
fn s_raw(dim: usize, t: f64, r2: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (4.0 * PI * t).powf(-(dim as f64) / 2.0) * (-r2 / (4.0 * t)).exp()
}

/// Planar heat kernel from the squared distance. Zero for t ≤ 0.
#[inline]
pub fn s2(t: f64, r2: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (-r2 / (4.0 * t)).exp() / (4.0 * PI * t)
}

/// S_n(t, x) = (4πt)^{-n/2} exp(−|x|²/4t) for t > 0 and 0 for t ≤ 0.
pub fn eval_s(p: &KernelParams, t: f64, x: &[f64]) -> Result<f64> {
    let r2 = check_point(p, t, x)?;
    Ok(s_raw(p.dim, t, r2))
}

/// Spatial gradient −x/(2t) S_n(t, x); zero for t ≤ 0.
pub fn eval_grad_s(p: &KernelParams, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    let r2 = check_point(p, t, x)?;
    if t <= 0.0 {
        return Ok(vec![0.0; p.dim]);
    }
    let s = s_raw(p.dim, t, r2);
    Ok(x.iter().map(|v| -v / (2.0 * t) * s).collect())
}

/// ∫_a^b S_n(s, x) ds for |x| = r. Closed form for n = 2, adaptive
/// Gauss–Kronrod with tolerance 1e-12 otherwise.
pub fn slab_integral_s(p: &KernelParams, r: f64, a: f64, b: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return invalid("slab integral needs r > 0 (log divergence at r = 0)");
    }
    if !(a >= 0.0) || !(b >= a) || !b.is_finite() {
        return invalid(format!("slab needs 0 <= a <= b, got [{a}, {b}]"));
    }
    if a == b {
        return Ok(0.0);
    }
    let r2 = r * r;
    if p.dim == 2 {
        return Ok(Slab::new(r2, a, b).i0);
    }
    let (v, _) = gk::integrate(|s| s_raw(p.dim, s, r2), a, b, 0.0, 1e-12);
    Ok(v)
}

/// Undivided central differences of s ↦ S_n(s, xi) at s = t with step
/// h = t/10, orders 0..=max_order. The k-th entry approximates
/// h^k ∂_s^k S_n(t, xi), a scale-free measure of how flat the kernel is as
/// t → 0⁺.
pub fn flatness_probe(p: &KernelParams, xi: &[f64], t: f64, max_order: usize) -> Result<Vec<f64>> {
    if max_order > 4 {
        return invalid("flatness probe supports orders up to 4");
    }
    if !(t > 0.0) {
        return invalid("flatness probe needs t > 0");
    }
    let r2 = check_point(p, t, xi)?;
    if r2 == 0.0 {
        return invalid("flatness probe needs xi != 0");
    }
    let h = t / 10.0;
    let f = |s: f64| s_raw(p.dim, s, r2);
    let mut out = Vec::with_capacity(max_order + 1);
    for k in 0..=max_order {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for j in 0..=k {
            let off = (k as f64 / 2.0 - j as f64) * h;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * f(t + off);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        out.push(acc.abs());
    }
    Ok(out)
}

/// Time moments of the planar kernel over a slab [a, b], in the local time
/// variable s − a. Valid for r ≥ 0 as long as a > 0 when r = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slab {
    /// ∫ S
    pub i0: f64,
    /// ∫ (s − a) S
    pub i1: f64,
    /// ∫ S / 2s
    pub j0: f64,
    /// ∫ (s − a) S / 2s
    pub j1: f64,
}

impl Slab {
    pub fn new(r2: f64, a: f64, b: f64) -> Self {
        debug_assert!(b > a && a >= 0.0);
        let c = r2 / 4.0;
        let inv4pi = 1.0 / (4.0 * PI);
        if r2 == 0.0 {
            debug_assert!(a > 0.0);
            let lg = (b / a).ln();
            let i0 = lg * inv4pi;
            let i1 = ((b - a) - a * lg) * inv4pi;
            let j0 = (b - a) / (8.0 * PI * a * b);
            return Self { i0, i1, j0, j1: 0.5 * i0 - a * j0 };
        }
        let xb = c / b;
        if xb > 700.0 {
            return Self { i0: 0.0, i1: 0.0, j0: 0.0, j1: 0.0 };
        }
        let e1b = e1(xb);
        let eb = (-xb).exp();
        let (i0, i1, j0);
        if a == 0.0 {
            i0 = e1b * inv4pi;
            i1 = (b * eb - c * e1b) * inv4pi;
            j0 = eb / (2.0 * PI * r2);
        } else {
            let xa = c / a;
            if xa > 1.0 {
                return Self::from_ends(r2, a, b, [e1(xa), (-xa).exp()], [e1b, eb]);
            }
            // E1(c/b) − E1(c/a) via Ein keeps precision when the slab is thin
            let d = ein(xb) - ein(xa) + (xa / xb).ln();
            i0 = d * inv4pi;
            let fa = a * (-xa).exp() - c * e1(xa);
            let fb = b * eb - c * e1b;
            i1 = (fb - fa) * inv4pi - a * i0;
            let w = c * (b - a) / (a * b);
            j0 = eb * (-(-w).exp_m1()) / (2.0 * PI * r2);
        }
        Self { i0, i1, j0, j1: 0.5 * i0 - a * j0 }
    }

    /// Moments over [a, b] with 0 < a from precomputed [E1(c/a), e^{−c/a}]
    /// and [E1(c/b), e^{−c/b}], c = r²/4. Callers sweeping consecutive
    /// slabs reuse each endpoint twice. Requires c/a > 1, where the plain
    /// difference of E1 values is well conditioned.
    pub fn from_ends(r2: f64, a: f64, b: f64, at_a: [f64; 2], at_b: [f64; 2]) -> Self {
        let c = r2 / 4.0;
        let inv4pi = 1.0 / (4.0 * PI);
        let [e1a, ea] = at_a;
        let [e1b, eb] = at_b;
        if eb == 0.0 && e1b == 0.0 {
            return Self { i0: 0.0, i1: 0.0, j0: 0.0, j1: 0.0 };
        }
        let i0 = (e1b - e1a) * inv4pi;
        let fa = a * ea - c * e1a;
        let fb = b * eb - c * e1b;
        let i1 = (fb - fa) * inv4pi - a * i0;
        let w = c * (b - a) / (a * b);
        let j0 = eb * (-(-w).exp_m1()) / (2.0 * PI * r2);
        Self { i0, i1, j0, j1: 0.5 * i0 - a * j0 }
    }
}

/// ∫_{R²} S(t, ·) by the tensor trapezoid rule on [−L, L]² with
/// L = 10√t and `nodes` points per axis.
pub fn gaussian_mass(t: f64, nodes: usize) -> Result<f64> {
    if !(t > 0.0) || nodes < 2 {
        return invalid("gaussian mass needs t > 0 and at least 2 nodes");
    }
    let l = 10.0 * t.sqrt();
    let h = 2.0 * l / (nodes - 1) as f64;
    let mut sum = 0.0;
    for i in 0..nodes {
        let x = -l + i as f64 * h;
        for j in 0..nodes {
            let y = -l + j as f64 * h;
            sum += s2(t, x * x + y * y);
        }
    }
    Ok(sum * h * h)
}

/// G(t, x) = ∫_{|y|<1} S(t, x − y) dy, the heat flow at time t of the
/// indicator of the unit disk. Polar coordinates around x: the radial
/// integral is (1 − e^{−ρ²/4t})/2π in closed form, the angular one is
/// adaptive with breaks at the tangent directions.
pub fn disk_gaussian(t: f64, x: [f64; 2]) -> f64 {
    use std::f64::consts::TAU;
    if t <= 0.0 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        return if r2 < 1.0 { 1.0 } else { 0.0 };
    }
    let r2 = x[0] * x[0] + x[1] * x[1];
    let radial = |rho: f64| -(-rho * rho / (4.0 * t)).exp_m1() / TAU;
    let f = |psi: f64| {
        let b = x[0] * psi.cos() + x[1] * psi.sin();
        let disc = b * b - r2 + 1.0;
        if disc <= 0.0 {
            return 0.0;
        }
        let (lo, hi) = ((-b - disc.sqrt()).max(0.0), (-b + disc.sqrt()).max(0.0));
        radial(hi) - radial(lo)
    };
    let mut breaks = vec![0.0, TAU];
    if r2 >= 1.0 - 1e-14 {
        let base = (-x[1]).atan2(-x[0]);
        let half = if r2 > 1.0 { (1.0 / r2.sqrt()).asin() } else { 0.5 * PI };
        for a in [base - half, base + half] {
            breaks.push(a.rem_euclid(TAU));
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.windows(2).map(|w| gk::integrate(f, w[0], w[1], 1e-14, 1e-13).0).sum()
}
