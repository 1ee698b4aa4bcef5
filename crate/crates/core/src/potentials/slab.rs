//! Space-time Nyström weights for one target against all source nodes over
//! a single time slab, and their assembly into lag blocks.
//!
//! On a slab [a, b] of the lag variable the density is linear, so every
//! rule returns two weight vectors: the kernel moments ∫K and ∫(s − a)K,
//! already multiplied by the spatial quadrature weights. Sources may live
//! on a grid p times finer than the density grid; fine weights are folded
//! back onto density nodes through the trigonometric cardinal functions.

use crate::geometry::BoundaryMap;
use crate::kernels::{e1, Slab};
use crate::quadrature::{kress_log_weights, CardinalTable, TimeGrid};
use crate::{dot, norm, Vec2};
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex, OnceLock};

/// Largest fine grid used for near-boundary targets.
pub const MAX_FINE_NODES: usize = 1 << 17;
/// Trapezoid resolution requirement a (N / max speed)² ≥ this for slabs
/// starting at lag a > 0.
const SMOOTH_RESOLUTION: f64 = 40.0;
/// Fine nodes per target distance for the first slab: spacing ≤ dist / 5.
const NEAR_RESOLUTION: f64 = 5.0;

/// Spatial part of the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// S(s, x − y) |φ′(y)|
    Single,
    /// ∂_{ν(y)} S(s, x − y) |φ′(y)|
    Double,
    /// D_x S(s, x − y) · e |φ′(y)| for a fixed direction e.
    Gradient(Vec2),
    /// D_x S(s, x − y) · ν(x) |φ′(y)| with ν the curve normal at an on-curve target.
    NormalGradient,
}

/// Where the kernel is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// Density node j on the curve.
    Node(usize),
    /// A point off the curve, physical coordinates.
    Point(Vec2),
}

/// Curve samples on a grid `p` times finer than the density grid.
pub struct FineGeom {
    pub n: usize,
    pub p: usize,
    pub nf: usize,
    /// φ minus its constant term.
    pub pts: Vec<Vec2>,
    pub speed: Vec<f64>,
    /// Unnormalized outward normal rot(φ′).
    pub nrm: Vec<Vec2>,
    /// φ″ · rot(φ′) / (4π |φ′|²), the on-curve limit of the double layer kernel.
    pub dlp_diag: Vec<f64>,
    table: Option<CardinalTable>,
    kress: OnceLock<Vec<f64>>,
}

impl FineGeom {
    fn new(phi: &BoundaryMap, n: usize, p: usize) -> Self {
        let nf = n * p;
        let mut pts = Vec::with_capacity(nf);
        let mut speed = Vec::with_capacity(nf);
        let mut nrm = Vec::with_capacity(nf);
        let mut dlp_diag = Vec::with_capacity(nf);
        for f in 0..nf {
            let th = TAU * f as f64 / nf as f64;
            let d1 = phi.d1(th);
            let d2 = phi.d2(th);
            let sp = norm(d1);
            let nv = [d1[1], -d1[0]];
            pts.push(phi.centered_point(th));
            speed.push(sp);
            nrm.push(nv);
            dlp_diag.push(dot(d2, nv) / (4.0 * PI * sp * sp));
        }
        let table = (p > 1).then(|| CardinalTable::new(n, p));
        Self { n, p, nf, pts, speed, nrm, dlp_diag, table, kress: OnceLock::new() }
    }

    fn kress(&self) -> &[f64] {
        self.kress.get_or_init(|| kress_log_weights(self.nf))
    }

    fn project(&self, fine: Vec<f64>) -> Vec<f64> {
        match &self.table {
            Some(t) => t.project(&fine),
            None => fine,
        }
    }
}

/// Shared curve data for all targets of one boundary map and density grid.
pub struct GeomCache {
    phi: BoundaryMap,
    n: usize,
    speed_max: f64,
    offset: Vec2,
    poly: Vec<Vec2>,
    fine: Mutex<HashMap<usize, Arc<FineGeom>>>,
}

impl GeomCache {
    pub fn new(phi: &BoundaryMap, n: usize) -> Self {
        let probe = 16 * n;
        let speed_max = (0..probe)
            .map(|i| phi.speed(TAU * i as f64 / probe as f64))
            .fold(0.0, f64::max);
        let c = phi.coeffs();
        Self {
            phi: phi.clone(),
            n,
            speed_max,
            offset: [c.cx[0], c.cy[0]],
            poly: phi.polygon(probe),
            fine: Mutex::new(HashMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn phi(&self) -> &BoundaryMap {
        &self.phi
    }
    pub fn speed_max(&self) -> f64 {
        self.speed_max
    }

    pub fn geom(&self, p: usize) -> Arc<FineGeom> {
        let mut map = self.fine.lock().unwrap();
        map.entry(p).or_insert_with(|| Arc::new(FineGeom::new(&self.phi, self.n, p))).clone()
    }

    /// Distance from a physical point to the sampled curve.
    pub fn distance(&self, x: Vec2) -> f64 {
        crate::geometry::polygon_distance(&self.poly, x)
    }

    /// Refinement factor for the slab [a, b] seen from a target at the
    /// given distance (0 for on-curve targets), and whether the cap was hit.
    pub fn refinement(&self, a: f64, b: f64, dist: f64) -> (usize, bool) {
        let n = self.n as f64;
        let lead = if a > 0.0 { a } else { b };
        let mut need = self.speed_max * (SMOOTH_RESOLUTION / lead).sqrt();
        if a == 0.0 && dist > 0.0 {
            need = need.max(TAU * NEAR_RESOLUTION * self.speed_max / dist);
        }
        let p = (need / n).ceil().max(1.0);
        let cap = (MAX_FINE_NODES / self.n).max(1);
        if p > cap as f64 {
            (cap, true)
        } else {
            (p as usize, false)
        }
    }
}

/// Moments (∫K, ∫(s − a)K) over the slab [a, b] for every density node.
pub fn slab_weights(cache: &GeomCache, target: Target, kernel: Kernel, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, dist) = match target {
        Target::Node(_) => ([0.0, 0.0], 0.0),
        Target::Point(x) => {
            let xc = [x[0] - cache.offset[0], x[1] - cache.offset[1]];
            (xc, cache.distance(x))
        }
    };
    let (p, _) = cache.refinement(a, b, dist);
    let g = cache.geom(p);
    let (w0, w1) = match target {
        Target::Node(j) if a == 0.0 => singular_rule(&g, j * p, kernel, b),
        Target::Node(j) => regular_rule(&g, g.pts[j * p], Some(j * p), kernel, a, b),
        Target::Point(_) => regular_rule(&g, x, None, kernel, a, b),
    };
    (g.project(w0), g.project(w1))
}

fn amplitude(g: &FineGeom, diff: Vec2, f: usize, kernel: Kernel, nu_target: Vec2) -> f64 {
    match kernel {
        Kernel::Single => g.speed[f],
        Kernel::Double => dot(diff, g.nrm[f]),
        Kernel::Gradient(e) => -dot(diff, e) * g.speed[f],
        Kernel::NormalGradient => -dot(diff, nu_target) * g.speed[f],
    }
}

fn target_normal(g: &FineGeom, jt: Option<usize>) -> Vec2 {
    match jt {
        Some(j) => [g.nrm[j][0] / g.speed[j], g.nrm[j][1] / g.speed[j]],
        None => [0.0, 0.0],
    }
}

/// Plain trapezoid; exact time moments of the kernel at every node.
fn regular_rule(g: &FineGeom, x: Vec2, jt: Option<usize>, kernel: Kernel, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let d = TAU / g.nf as f64;
    let nu = target_normal(g, jt);
    let mut w0 = vec![0.0; g.nf];
    let mut w1 = vec![0.0; g.nf];
    for f in 0..g.nf {
        let diff = [x[0] - g.pts[f][0], x[1] - g.pts[f][1]];
        let amp = amplitude(g, diff, f, kernel, nu);
        if amp == 0.0 {
            continue;
        }
        let m = Slab::new(dot(diff, diff), a, b);
        let (k0, k1) = match kernel {
            Kernel::Single => (m.i0, m.i1),
            _ => (m.j0, m.j1),
        };
        w0[f] = d * amp * k0;
        w1[f] = d * amp * k1;
    }
    (w0, w1)
}

/// The slab [0, b] at an on-curve target: the logarithmic parts of the
/// exponential integral are integrated by the periodic log rule, the
/// Cauchy part of tangential gradients by the alternating-node rule, and
/// bounded kernels by the trapezoid with their diagonal limits.
fn singular_rule(g: &FineGeom, jt: usize, kernel: Kernel, b: f64) -> (Vec<f64>, Vec<f64>) {
    let nf = g.nf;
    let d = TAU / nf as f64;
    let r = g.kress();
    let nu = target_normal(g, Some(jt));
    let x = g.pts[jt];
    let inv4pi = 1.0 / (4.0 * PI);
    let mut w0 = vec![0.0; nf];
    let mut w1 = vec![0.0; nf];
    for f in 0..nf {
        let off = (f + nf - jt) % nf;
        let rk = r[off];
        if f == jt {
            let sp = g.speed[f];
            match kernel {
                Kernel::Single => {
                    let s0 = sp * inv4pi * (4f64.ln() - (sp * sp).ln() - crate::kernels::EULER_GAMMA + b.ln());
                    w0[f] = -sp * inv4pi * rk + d * s0;
                    w1[f] = d * sp * b * inv4pi;
                }
                Kernel::Double | Kernel::NormalGradient => {
                    w0[f] = d * g.dlp_diag[f];
                }
                Kernel::Gradient(_) => {}
            }
            continue;
        }
        let diff = [x[0] - g.pts[f][0], x[1] - g.pts[f][1]];
        let r2 = dot(diff, diff);
        let c = r2 / 4.0;
        let e1b = e1(c / b);
        let eb = (-c / b).exp();
        let half = 0.5 * TAU * off as f64 / nf as f64;
        let lg = (4.0 * half.sin().powi(2)).ln();
        let amp = amplitude(g, diff, f, kernel, nu);
        match kernel {
            Kernel::Single => {
                w0[f] = -amp * inv4pi * rk + d * amp * inv4pi * (e1b + lg);
                w1[f] = amp * c * inv4pi * rk + d * amp * inv4pi * (b * eb - c * e1b - c * lg);
            }
            _ => {
                let j0 = eb / (2.0 * PI * r2);
                w0[f] = match kernel {
                    Kernel::Gradient(_) => {
                        if off % 2 == 1 {
                            2.0 * d * amp * j0
                        } else {
                            0.0
                        }
                    }
                    _ => d * amp * j0,
                };
                let inv8pi = 0.5 * inv4pi;
                w1[f] = -amp * inv8pi * rk + d * amp * inv8pi * (e1b + lg);
            }
        }
    }
    (w0, w1)
}

/// Lag blocks for one target: `b[L]` multiplies μ at lag L (L = 0..M−1)
/// and `a[i − 1]` multiplies μ(t_0) in the output at t_i.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetWeights {
    pub b: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
}

impl TargetWeights {
    /// Values at t_0..t_M for a density stored row-major (M+1)×N.
    pub fn apply(&self, mu: &[f64], n: usize) -> Vec<f64> {
        let m = self.b.len();
        let mut out = vec![0.0; m + 1];
        for (i, o) in out.iter_mut().enumerate().skip(1) {
            let mut acc: f64 = self.a[i - 1].iter().zip(&mu[..n]).map(|(w, v)| w * v).sum();
            for k in 1..=i {
                acc += self.b[i - k].iter().zip(&mu[k * n..(k + 1) * n]).map(|(w, v)| w * v).sum::<f64>();
            }
            *o = acc;
        }
        out
    }
}

/// Splits slab moments into the weights of the density at the two ends of
/// the slab: (at s = a, at s = b).
#[inline]
pub fn end_weights(w0: &[f64], w1: &[f64], width: f64) -> (Vec<f64>, Vec<f64>) {
    let near = w0.iter().zip(w1).map(|(k0, k1)| k0 - k1 / width).collect();
    let far = w1.iter().map(|k1| k1 / width).collect();
    (near, far)
}

/// Lag blocks for a target on the uniform grid.
pub fn lag_weights(cache: &GeomCache, target: Target, kernel: Kernel, time: &TimeGrid) -> TargetWeights {
    let m = time.steps();
    let h = time.step();
    let mut c = Vec::with_capacity(m);
    let mut a = Vec::with_capacity(m);
    let dist = match target {
        Target::Point(x) => cache.distance(x),
        Target::Node(_) => 0.0,
    };
    let mut l = 0;
    while l < m {
        // refinement only decreases with the lag, so the rest is coarse
        if let Target::Point(x) = target {
            if l > 0 && cache.refinement(l as f64 * h, (l + 1) as f64 * h, dist).0 == 1 {
                let (near, far) = coarse_tail(cache, x, kernel, l, m, h);
                c.extend(near);
                a.extend(far);
                break;
            }
        }
        let (w0, w1) = slab_weights(cache, target, kernel, l as f64 * h, (l + 1) as f64 * h);
        let (near, far) = end_weights(&w0, &w1, h);
        c.push(near);
        a.push(far);
        l += 1;
    }
    let mut b = c;
    for l in 1..m {
        let prev = &a[l - 1];
        for (x, y) in b[l].iter_mut().zip(prev) {
            *x += y;
        }
    }
    TargetWeights { b, a }
}

/// End weights of lags l0..m at an off-curve point on the density grid
/// itself. Each kernel primitive is evaluated once per grid time and
/// shared by the two slabs meeting there.
fn coarse_tail(cache: &GeomCache, x: Vec2, kernel: Kernel, l0: usize, m: usize, h: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let g = cache.geom(1);
    let xc = [x[0] - cache.offset[0], x[1] - cache.offset[1]];
    let d = TAU / g.nf as f64;
    let nu = target_normal(&g, None);
    let lags = m - l0;
    let mut near = vec![vec![0.0; g.nf]; lags];
    let mut far = vec![vec![0.0; g.nf]; lags];
    let mut ends = vec![[0.0; 2]; lags + 1];
    for f in 0..g.nf {
        let diff = [xc[0] - g.pts[f][0], xc[1] - g.pts[f][1]];
        let amp = amplitude(&g, diff, f, kernel, nu);
        if amp == 0.0 {
            continue;
        }
        let r2 = dot(diff, diff);
        let cq = r2 / 4.0;
        for (q, e) in ends.iter_mut().enumerate() {
            let z = cq / ((l0 + q) as f64 * h);
            *e = if z > 700.0 { [0.0, 0.0] } else { [e1(z), (-z).exp()] };
        }
        for q in 0..lags {
            let (a, b) = ((l0 + q) as f64 * h, (l0 + q + 1) as f64 * h);
            let mo = if cq / a > 1.0 { Slab::from_ends(r2, a, b, ends[q], ends[q + 1]) } else { Slab::new(r2, a, b) };
            let (k0, k1) = match kernel {
                Kernel::Single => (mo.i0, mo.i1),
                _ => (mo.j0, mo.j1),
            };
            let (w0, w1) = (d * amp * k0, d * amp * k1);
            near[q][f] = w0 - w1 / h;
            far[q][f] = w1 / h;
        }
    }
    (near, far)
}

/// Weights for the value at an arbitrary time t ∈ [0, T], as an
/// (M+1)×N row-major array over the density samples.
pub fn weights_at(cache: &GeomCache, target: Target, kernel: Kernel, time: &TimeGrid, t: f64) -> Vec<f64> {
    let n = cache.n;
    let m = time.steps();
    let h = time.step();
    let mut w = vec![0.0; (m + 1) * n];
    if t <= 0.0 {
        return w;
    }
    let q = ((t / h).ceil() as usize).clamp(1, m) - 1;
    let d = t - time.node(q);
    let mut add = |k: usize, c: f64, v: &[f64]| {
        for (o, x) in w[k * n..(k + 1) * n].iter_mut().zip(v) {
            *o += c * x;
        }
    };
    // partial piece τ ∈ [t_q, t]: μ(t) interpolates μ_q and μ_{q+1}
    let (w0, w1) = slab_weights(cache, target, kernel, 0.0, d);
    let (near, far) = end_weights(&w0, &w1, d);
    let lam = d / h;
    add(q + 1, lam, &near);
    add(q, 1.0 - lam, &near);
    add(q, 1.0, &far);
    for l in 0..q {
        let (lo, hi) = (d + l as f64 * h, d + (l + 1) as f64 * h);
        let (w0, w1) = slab_weights(cache, target, kernel, lo, hi);
        let (near, far) = end_weights(&w0, &w1, h);
        add(q - l, 1.0, &near);
        add(q - l - 1, 1.0, &far);
    }
    w
}
