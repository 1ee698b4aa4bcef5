use super::annulus::{AnnulusField, AnnulusGrid};
use crate::error::{invalid, Error, Result};
use crate::geometry::TubularExtension;
use crate::quadrature::diff_matrix;
use crate::Vec2;
use std::f64::consts::TAU;

/// The pair (w₀, w₁) of a scalar and a vector field on one annulus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakPair {
    pub grid: AnnulusGrid,
    /// Reference radius, needed for the area element (R + s) dθ ds.
    pub radius: f64,
    pub w0: Vec<f64>,
    pub w1: Vec<Vec2>,
}

impl WeakPair {
    pub fn zeros(grid: AnnulusGrid, radius: f64) -> Self {
        Self { grid, radius, w0: vec![0.0; grid.len()], w1: vec![[0.0; 2]; grid.len()] }
    }
}

/// Chart derivatives (∂_θu, ∂_su) at every sample: spectral in θ, centred
/// second-order differences in s with one-sided stencils at both ends.
pub(crate) fn chart_gradient(u: &AnnulusField) -> Vec<[f64; 2]> {
    let g = u.grid;
    let (n, kk) = (g.n_theta, g.n_s);
    let d = diff_matrix(n);
    let inv = g.shell.sign() / g.ds();
    let mut out = vec![[0.0; 2]; g.len()];
    for i in 0..=g.time.steps() {
        for k in 0..kk {
            for j in 0..n {
                let mut acc = 0.0;
                for (m, dv) in d[j * n..(j + 1) * n].iter().enumerate() {
                    acc += dv * u.at(i, m, k);
                }
                out[g.index(i, j, k)][0] = acc;
            }
        }
        for j in 0..n {
            let v = |k: usize| u.at(i, j, k);
            for k in 0..kk {
                let dk = if k == 0 {
                    -1.5 * v(0) + 2.0 * v(1) - 0.5 * v(2)
                } else if k == kk - 1 {
                    1.5 * v(k) - 2.0 * v(k - 1) + 0.5 * v(k - 2)
                } else {
                    0.5 * (v(k + 1) - v(k - 1))
                };
                out[g.index(i, j, k)][1] = dk * inv;
            }
        }
    }
    out
}

/// Reference-coordinate gradient Du^T from chart derivatives at x(θ, s).
pub(crate) fn reference_gradient(radius: f64, theta: f64, s: f64, dts: [f64; 2]) -> Vec2 {
    let (c, si) = (theta.cos(), theta.sin());
    let r = radius + s;
    [-si * dts[0] / r + c * dts[1], c * dts[0] / r + si * dts[1]]
}

/// B_Ω(Φ, u) = (−|det DΦ| u, (DΦ)^{-1}(DΦ)^{-T}(Du)^T |det DΦ|).
pub fn b_omega(ext: &TubularExtension, u: &AnnulusField) -> Result<WeakPair> {
    let g = u.grid;
    let radius = ext.radius();
    let grad = chart_gradient(u);
    // DΦ depends on (θ, s) only
    let mut geo = Vec::with_capacity(g.n_theta * g.n_s);
    for j in 0..g.n_theta {
        for k in 0..g.n_s {
            let m = ext.dphi(g.theta(j), g.s(k));
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if !(det.abs() > 1e-14) {
                return Err(Error::Geometry(format!("singular DΦ at θ = {}, s = {}", g.theta(j), g.s(k))));
            }
            let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
            geo.push((inv, det.abs()));
        }
    }
    let mut pair = WeakPair::zeros(g, radius);
    for i in 0..=g.time.steps() {
        for j in 0..g.n_theta {
            for k in 0..g.n_s {
                let idx = g.index(i, j, k);
                let (inv, adet) = geo[j * g.n_s + k];
                let du = reference_gradient(radius, g.theta(j), g.s(k), grad[idx]);
                // y = (DΦ)^{-T} du, then (DΦ)^{-1} y
                let y = [inv[0][0] * du[0] + inv[1][0] * du[1], inv[0][1] * du[0] + inv[1][1] * du[1]];
                let x = [inv[0][0] * y[0] + inv[0][1] * y[1], inv[1][0] * y[0] + inv[1][1] * y[1]];
                pair.w0[idx] = -adet * u.values[idx];
                pair.w1[idx] = [adet * x[0], adet * x[1]];
            }
        }
    }
    Ok(pair)
}

/// One member of the fixed test family: bump(t) · bump(s) · trig(θ), with
/// the s-bump supported in the middle 80% of the shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    /// Support of the time bump as fractions of T.
    pub t_support: (f64, f64),
    pub order: u32,
    pub sine: bool,
}

/// The ten test functions: orders 0..=4 in θ (cosine and sine, constant
/// once) on the time window [0.1T, 0.9T], plus a constant-in-θ member on
/// the narrower window [0.3T, 0.7T].
pub fn test_family() -> Vec<TestFunction> {
    let wide = (0.1, 0.9);
    let mut f = vec![TestFunction { t_support: wide, order: 0, sine: false }];
    for order in 1..=4 {
        f.push(TestFunction { t_support: wide, order, sine: false });
        f.push(TestFunction { t_support: wide, order, sine: true });
    }
    f.push(TestFunction { t_support: (0.3, 0.7), order: 0, sine: false });
    f
}

/// exp(−1/(1 − z²)) on (−1, 1) and its derivative.
fn bump(z: f64) -> (f64, f64) {
    if z.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - z * z;
    let b = (-1.0 / q).exp();
    (b, b * (-2.0 * z / (q * q)))
}

impl TestFunction {
    /// (∂_tψ, ∂_θψ, ∂_sψ) at a chart point of the given grid.
    fn derivatives(&self, g: &AnnulusGrid, t: f64, theta: f64, s: f64) -> [f64; 3] {
        let tf = g.time.t_final();
        let (a, b) = (self.t_support.0 * tf, self.t_support.1 * tf);
        let (tc, th) = (0.5 * (a + b), 0.5 * (b - a));
        let sc = g.shell.sign() * 0.5 * g.delta;
        let sh = 0.4 * g.delta;
        let (bt, dbt) = bump((t - tc) / th);
        let (bs, dbs) = bump((s - sc) / sh);
        let k = self.order as f64;
        let (tr, dtr) = if self.sine {
            ((k * theta).sin(), k * (k * theta).cos())
        } else {
            ((k * theta).cos(), -k * (k * theta).sin())
        };
        [dbt / th * bs * tr, bt * bs * dtr, bt * dbs / sh * tr]
    }
}

/// Trapezoid weight along an axis with `n` points.
fn trap(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// Weak heat residual: the largest over the test family of
/// |∫∫ (w₀ − r₀)∂_tψ + Dψ·(w₁ − r₁) dx dt| divided by the same integral with
/// absolute values of both pairs' terms. Zero when pair = rhs.
pub fn weak_heat_residual(pair: &WeakPair, rhs: &WeakPair, family: &[TestFunction]) -> Result<f64> {
    if pair.grid != rhs.grid || pair.radius != rhs.radius {
        return invalid("weak pairs live on different grids");
    }
    let g = pair.grid;
    let m = g.time.steps();
    let cell = g.time.step() * (TAU / g.n_theta as f64) * g.ds();
    let mut worst: f64 = 0.0;
    for f in family {
        let (mut num, mut scale) = (0.0, 0.0);
        for i in 0..=m {
            let t = g.time.node(i);
            for j in 0..g.n_theta {
                let th = g.theta(j);
                for k in 0..g.n_s {
                    let s = g.s(k);
                    let [dt, dth, ds] = f.derivatives(&g, t, th, s);
                    if dt == 0.0 && dth == 0.0 && ds == 0.0 {
                        continue;
                    }
                    let w = trap(i, m + 1) * trap(k, g.n_s) * (pair.radius + s) * cell;
                    let dpsi = reference_gradient(pair.radius, th, s, [dth, ds]);
                    let idx = g.index(i, j, k);
                    let (a, b) = (pair.w0[idx] * dt, pair.w1[idx][0] * dpsi[0] + pair.w1[idx][1] * dpsi[1]);
                    let (ra, rb) = (rhs.w0[idx] * dt, rhs.w1[idx][0] * dpsi[0] + rhs.w1[idx][1] * dpsi[1]);
                    num += w * ((a - ra) + (b - rb));
                    scale += w * (a.abs() + b.abs() + ra.abs() + rb.abs());
                }
            }
        }
        if scale > 0.0 {
            worst = worst.max(num.abs() / scale);
        }
    }
    Ok(worst)
}

