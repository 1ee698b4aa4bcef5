//! Boundary parametrizations of the reference circle, their normals and
//! area elements, tubular collars and point classification.
//!
//! A boundary map is a trigonometric polynomial in the angle θ of the
//! reference circle x(θ) = R(cos θ, sin θ):
//!
//! ```text
//! φ(θ) = Σ_k (cx_k cos kθ + sx_k sin kθ,  cy_k cos kθ + sy_k sin kθ)
//! ```

mod shape_file;

pub use shape_file::{load_shape, parse_shape};

use crate::error::{Error, Result};
use crate::{dot, norm, sub, Vec2};
use sha2::{Digest, Sha256};
use std::f64::consts::TAU;

/// Number of angles at which speed and orientation are certified.
pub const SPEED_SAMPLES: usize = 1024;
/// Number of angles whose pairwise distances certify injectivity.
pub const INJECTIVITY_SAMPLES: usize = 256;
const INJECTIVITY_FLOOR: f64 = 1e-6;

/// The fixed reference boundary, a circle of radius R traversed
/// counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCircle {
    radius: f64,
}

impl ReferenceCircle {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Geometry(format!("reference radius must be positive, got {radius}")));
        }
        Ok(Self { radius })
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn point(&self, theta: f64) -> Vec2 {
        [self.radius * theta.cos(), self.radius * theta.sin()]
    }
    /// Outward unit normal ν_Ω.
    pub fn normal(&self, theta: f64) -> Vec2 {
        [theta.cos(), theta.sin()]
    }
}

/// Fourier coefficients of the two components, indexed by degree k.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigCoeffs {
    pub cx: Vec<f64>,
    pub sx: Vec<f64>,
    pub cy: Vec<f64>,
    pub sy: Vec<f64>,
}

impl TrigCoeffs {
    pub fn zeros(degree: usize) -> Self {
        let z = vec![0.0; degree + 1];
        Self { cx: z.clone(), sx: z.clone(), cy: z.clone(), sy: z }
    }

    pub fn degree(&self) -> usize {
        [self.cx.len(), self.sx.len(), self.cy.len(), self.sy.len()].into_iter().max().unwrap_or(1).max(1) - 1
    }

    fn padded(&self, degree: usize) -> Self {
        let pad = |v: &Vec<f64>| {
            let mut w = v.clone();
            w.resize(degree + 1, 0.0);
            w
        };
        Self { cx: pad(&self.cx), sx: pad(&self.sx), cy: pad(&self.cy), sy: pad(&self.sy) }
    }

    /// Coefficient-wise a + s·b.
    pub fn axpy(&self, s: f64, other: &TrigCoeffs) -> TrigCoeffs {
        let d = self.degree().max(other.degree());
        let a = self.padded(d);
        let b = other.padded(d);
        let f = |x: &Vec<f64>, y: &Vec<f64>| x.iter().zip(y).map(|(p, q)| p + s * q).collect();
        TrigCoeffs { cx: f(&a.cx, &b.cx), sx: f(&a.sx, &b.sx), cy: f(&a.cy, &b.cy), sy: f(&a.sy, &b.sy) }
    }

    /// The m-th θ-derivative of the curve at θ.
    pub fn derivative(&self, theta: f64, m: u32) -> Vec2 {
        self.partial_sum(theta, m, if m > 0 { 1 } else { 0 })
    }

    fn partial_sum(&self, theta: f64, m: u32, kmin: usize) -> Vec2 {
        let at = |v: &Vec<f64>, k: usize| v.get(k).copied().unwrap_or(0.0);
        let mut out = [0.0, 0.0];
        for k in kmin..=self.degree() {
            let kf = k as f64;
            let (c, s) = ((kf * theta).cos(), (kf * theta).sin());
            // d^m/dθ^m of (cos, sin)(kθ) cycles through (−sin, cos), (−cos, −sin), ...
            let scale = kf.powi(m as i32);
            let (dc, ds) = match m % 4 {
                0 => (c, s),
                1 => (-s, c),
                2 => (-c, -s),
                _ => (s, -c),
            };
            out[0] += scale * (at(&self.cx, k) * dc + at(&self.sx, k) * ds);
            out[1] += scale * (at(&self.cy, k) * dc + at(&self.sy, k) * ds);
        }
        out
    }
}

/// A validated parametrization φ of a positively oriented Jordan curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMap {
    circle: ReferenceCircle,
    coeffs: TrigCoeffs,
}

impl BoundaryMap {
    /// Builds and certifies a map: nonvanishing speed and positive
    /// orientation at [`SPEED_SAMPLES`] angles, and a pairwise distance ratio
    /// above 1e-6 over [`INJECTIVITY_SAMPLES`] angles.
    pub fn new(radius: f64, coeffs: TrigCoeffs) -> Result<Self> {
        let circle = ReferenceCircle::new(radius)?;
        let all = coeffs.cx.iter().chain(&coeffs.sx).chain(&coeffs.cy).chain(&coeffs.sy);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::Geometry("non-finite coefficient".into()));
        }
        let map = Self { circle, coeffs: coeffs.padded(coeffs.degree()) };
        let min_speed = (0..SPEED_SAMPLES)
            .map(|i| norm(map.d1(TAU * i as f64 / SPEED_SAMPLES as f64)))
            .fold(f64::INFINITY, f64::min);
        if !(min_speed > 0.0) {
            return Err(Error::Geometry("differential vanishes somewhere on the circle".into()));
        }
        if map.signed_area() <= 0.0 {
            return Err(Error::Geometry("curve is not positively oriented".into()));
        }
        let inj = map.injectivity_ratio(INJECTIVITY_SAMPLES);
        if !(inj > INJECTIVITY_FLOOR) {
            return Err(Error::Geometry(format!("map is not injective (distance ratio {inj:.3e})")));
        }
        if polygon_crosses_itself(&map.polygon(SPEED_SAMPLES)) {
            return Err(Error::Geometry("curve crosses itself".into()));
        }
        Ok(map)
    }

    pub fn identity(radius: f64) -> Result<Self> {
        Self::dilation(1.0, radius)
    }

    pub fn dilation(lambda: f64, radius: f64) -> Result<Self> {
        let mut c = TrigCoeffs::zeros(1);
        c.cx[1] = lambda * radius;
        c.sy[1] = lambda * radius;
        Self::new(radius, c)
    }

    /// The unit-circle map θ ↦ ρ(θ)(cos θ, sin θ) with ρ = 1 + a cos(kθ).
    pub fn rose(a: f64, k: usize) -> Result<Self> {
        let mut c = TrigCoeffs::zeros(k + 1);
        c.cx[1] += 1.0;
        c.sy[1] += 1.0;
        // cos kθ cos θ and cos kθ sin θ as sums of single harmonics
        c.cx[k + 1] += 0.5 * a;
        c.cx[k - 1] += 0.5 * a;
        c.sy[k + 1] += 0.5 * a;
        if k >= 2 {
            c.sy[k - 1] -= 0.5 * a;
        }
        Self::new(1.0, c)
    }

    pub fn circle(&self) -> ReferenceCircle {
        self.circle
    }
    pub fn radius(&self) -> f64 {
        self.circle.radius
    }
    pub fn coeffs(&self) -> &TrigCoeffs {
        &self.coeffs
    }

    pub fn point(&self, theta: f64) -> Vec2 {
        self.coeffs.derivative(theta, 0)
    }
    /// φ without its constant term; differences of these are exactly
    /// invariant under translation of the curve.
    pub fn centered_point(&self, theta: f64) -> Vec2 {
        self.coeffs.partial_sum(theta, 0, 1)
    }
    pub fn d1(&self, theta: f64) -> Vec2 {
        self.coeffs.derivative(theta, 1)
    }
    pub fn d2(&self, theta: f64) -> Vec2 {
        self.coeffs.derivative(theta, 2)
    }
    pub fn speed(&self, theta: f64) -> f64 {
        norm(self.d1(theta))
    }

    /// Translated copy.
    pub fn translated(&self, v: Vec2) -> Result<Self> {
        let mut c = self.coeffs.clone();
        c.cx[0] += v[0];
        c.cy[0] += v[1];
        Self::new(self.radius(), c)
    }

    /// Copy rotated by `angle` about the origin.
    pub fn rotated(&self, angle: f64) -> Result<Self> {
        let (co, si) = (angle.cos(), angle.sin());
        let c = &self.coeffs;
        let rot = |x: &Vec<f64>, y: &Vec<f64>| -> (Vec<f64>, Vec<f64>) {
            x.iter().zip(y).map(|(a, b)| (co * a - si * b, si * a + co * b)).unzip()
        };
        let (cx, cy) = rot(&c.cx, &c.cy);
        let (sx, sy) = rot(&c.sx, &c.sy);
        Self::new(self.radius(), TrigCoeffs { cx, sx, cy, sy })
    }

    /// 1/2 ∮ (x dy − y dx).
    pub fn signed_area(&self) -> f64 {
        let n = SPEED_SAMPLES;
        let mut a = 0.0;
        for i in 0..n {
            let th = TAU * i as f64 / n as f64;
            let p = self.point(th);
            let d = self.d1(th);
            a += p[0] * d[1] - p[1] * d[0];
        }
        0.5 * a * TAU / n as f64
    }

    /// min over sampled pairs of |φ(θ₁) − φ(θ₂)| / |x(θ₁) − x(θ₂)|.
    pub fn injectivity_ratio(&self, samples: usize) -> f64 {
        let pts: Vec<Vec2> = (0..samples).map(|i| self.point(TAU * i as f64 / samples as f64)).collect();
        let mut best = f64::INFINITY;
        for i in 0..samples {
            for j in i + 1..samples {
                let dth = TAU * (j - i) as f64 / samples as f64;
                let chord = 2.0 * self.radius() * (0.5 * dth).sin().abs();
                best = best.min(norm(sub(pts[i], pts[j])) / chord);
            }
        }
        best
    }

    /// Stable 64-bit fingerprint of the reference radius and coefficients.
    pub fn shape_hash(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(self.radius().to_le_bytes());
        for v in [&self.coeffs.cx, &self.coeffs.sx, &self.coeffs.cy, &self.coeffs.sy] {
            h.update((v.len() as u64).to_le_bytes());
            for x in v {
                h.update(x.to_le_bytes());
            }
        }
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().unwrap())
    }

    /// Polygon through `n` equally spaced parameter values.
    pub fn polygon(&self, n: usize) -> Vec<Vec2> {
        (0..n).map(|i| self.point(TAU * i as f64 / n as f64)).collect()
    }

    /// Number of polygon vertices used for classification and distances.
    pub fn fine_count(&self) -> usize {
        (64 * (self.coeffs.degree() + 1)).max(4096)
    }
}

/// Area-element ratio |(φ∘x)′(θ)| / |x′(θ)|.
pub fn sigma_tilde(phi: &BoundaryMap, theta: f64) -> f64 {
    phi.speed(theta) / phi.radius()
}

#[inline]
fn rot_cw(v: Vec2) -> Vec2 {
    [v[1], -v[0]]
}

/// Outward unit normal of φ(∂Ω) at φ(x(θ)).
pub fn normal_of_map(phi: &BoundaryMap, theta: f64) -> Vec2 {
    let d = phi.d1(theta);
    let s = norm(d);
    [d[1] / s, -d[0] / s]
}

/// θ-derivative of the outward unit normal.
pub fn normal_derivative_theta(phi: &BoundaryMap, theta: f64) -> Vec2 {
    let d1 = phi.d1(theta);
    let d2 = phi.d2(theta);
    let s = norm(d1);
    let a = rot_cw(d2);
    let b = rot_cw(d1);
    let k = dot(d1, d2) / (s * s * s);
    [a[0] / s - b[0] * k, a[1] / s - b[1] * k]
}

/// Which side of the curve a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

/// Whether two non-adjacent edges of the closed polygon intersect.
fn polygon_crosses_itself(poly: &[Vec2]) -> bool {
    let n = poly.len();
    let cross = |o: Vec2, a: Vec2, b: Vec2| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let edges: Vec<(Vec2, Vec2, [f64; 4])> = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            (a, b, [a[0].min(b[0]), a[0].max(b[0]), a[1].min(b[1]), a[1].max(b[1])])
        })
        .collect();
    for i in 0..n {
        let (a, b, ba) = edges[i];
        for (j, &(c, d, bc)) in edges.iter().enumerate().skip(i + 2) {
            if i == 0 && j == n - 1 {
                continue;
            }
            if ba[1] < bc[0] || bc[1] < ba[0] || ba[3] < bc[2] || bc[3] < ba[2] {
                continue;
            }
            let (d1, d2) = (cross(a, b, c), cross(a, b, d));
            let (d3, d4) = (cross(c, d, a), cross(c, d, b));
            if d1 * d2 <= 0.0 && d3 * d4 <= 0.0 {
                return true;
            }
        }
    }
    false
}

/// Distance from `y` to the closed polygon `poly`.
pub fn polygon_distance(poly: &[Vec2], y: Vec2) -> f64 {
    let n = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let ab = sub(b, a);
        let l2 = dot(ab, ab);
        let t = if l2 > 0.0 { (dot(sub(y, a), ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
        let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
        best = best.min(norm(sub(y, q)));
    }
    best
}

fn winding_number(poly: &[Vec2], y: Vec2) -> i64 {
    let n = poly.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = sub(poly[i], y);
        let b = sub(poly[(i + 1) % n], y);
        total += (a[0] * b[1] - a[1] * b[0]).atan2(dot(a, b));
    }
    (total / TAU).round() as i64
}

/// Interior/exterior by the winding number of a fine polygon around `y`.
/// Points within 1e-9 of the polygon are rejected.
pub fn classify_point(phi: &BoundaryMap, y: Vec2) -> Result<Side> {
    classify_with_polygon(&phi.polygon(phi.fine_count()), y)
}

/// [`classify_point`] against a precomputed polygon.
pub fn classify_with_polygon(poly: &[Vec2], y: Vec2) -> Result<Side> {
    if polygon_distance(poly, y) < 1e-9 {
        return Err(Error::Geometry("point lies on the curve".into()));
    }
    match winding_number(poly, y) {
        1 => Ok(Side::Interior),
        0 => Ok(Side::Exterior),
        w => Err(Error::Geometry(format!("unexpected winding number {w}"))),
    }
}

/// How the collar is swept out from the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Offset {
    /// Φ(x(θ) + sν_Ω) = φ(θ) + s ν_φ(θ).
    Normal,
    /// Φ(x(θ) + sν_Ω) = φ(θ) + s ν_Ω(θ); linear in φ and admissible for
    /// every star-shaped φ whenever δ < R.
    Radial,
}

/// A concrete extension Φ of φ to the annulus R − δ ≤ |x| ≤ R + δ, with the
/// inner shell s ∈ [−δ, 0] (the + side) mapped to the interior of φ(∂Ω).
#[derive(Debug, Clone, PartialEq)]
pub struct TubularExtension {
    base: BoundaryMap,
    delta: f64,
    offset: Offset,
}

/// Chart grid used to certify an extension (θ × s samples).
pub const EXTENSION_CHECK_GRID: (usize, usize) = (512, 64);

/// Normal-offset extension, certified on the chart grid.
pub fn extend(phi: &BoundaryMap, delta: f64) -> Result<TubularExtension> {
    TubularExtension::new(phi, delta, Offset::Normal)
}

/// Radial-offset extension, certified on the chart grid.
pub fn extend_radial(phi: &BoundaryMap, delta: f64) -> Result<TubularExtension> {
    TubularExtension::new(phi, delta, Offset::Radial)
}

impl TubularExtension {
    pub fn new(phi: &BoundaryMap, delta: f64, offset: Offset) -> Result<Self> {
        let too_large = || Error::Geometry("delta too large for this shape".into());
        if !(delta > 0.0) || delta >= phi.radius() {
            return Err(too_large());
        }
        let ext = Self { base: phi.clone(), delta, offset };
        let (nt, ns) = EXTENSION_CHECK_GRID;
        for i in 0..nt {
            let th = TAU * i as f64 / nt as f64;
            for k in 0..=ns {
                let s = -delta + 2.0 * delta * k as f64 / ns as f64;
                if !(ext.det(th, s) > 0.0) {
                    return Err(too_large());
                }
            }
        }
        // the offset curves must stay simple and on the right side
        for s in [-delta, delta] {
            let curve: Vec<Vec2> = (0..INJECTIVITY_SAMPLES)
                .map(|i| ext.point(TAU * i as f64 / INJECTIVITY_SAMPLES as f64, s))
                .collect();
            for i in 0..curve.len() {
                for j in i + 1..curve.len() {
                    if norm(sub(curve[i], curve[j])) < 1e-9 {
                        return Err(too_large());
                    }
                }
            }
        }
        let poly = phi.polygon(phi.fine_count());
        for i in 0..64 {
            let th = TAU * i as f64 / 64.0;
            for (s, want) in [(-delta, Side::Interior), (-0.5 * delta, Side::Interior), (0.5 * delta, Side::Exterior), (delta, Side::Exterior)] {
                if classify_with_polygon(&poly, ext.point(th, s)).ok() != Some(want) {
                    return Err(too_large());
                }
            }
        }
        Ok(ext)
    }

    pub fn base(&self) -> &BoundaryMap {
        &self.base
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn offset(&self) -> Offset {
        self.offset
    }
    pub fn radius(&self) -> f64 {
        self.base.radius()
    }

    fn direction(&self, theta: f64) -> Vec2 {
        match self.offset {
            Offset::Normal => normal_of_map(&self.base, theta),
            Offset::Radial => [theta.cos(), theta.sin()],
        }
    }

    fn direction_theta(&self, theta: f64) -> Vec2 {
        match self.offset {
            Offset::Normal => normal_derivative_theta(&self.base, theta),
            Offset::Radial => [-theta.sin(), theta.cos()],
        }
    }

    /// Φ at chart coordinates (θ, s), i.e. at x = (R + s)(cos θ, sin θ).
    pub fn point(&self, theta: f64, s: f64) -> Vec2 {
        let p = self.base.point(theta);
        let d = self.direction(theta);
        [p[0] + s * d[0], p[1] + s * d[1]]
    }

    /// Columns ∂_θΦ and ∂_sΦ.
    pub fn chart_jacobian(&self, theta: f64, s: f64) -> (Vec2, Vec2) {
        let d1 = self.base.d1(theta);
        let dn = self.direction_theta(theta);
        ([d1[0] + s * dn[0], d1[1] + s * dn[1]], self.direction(theta))
    }

    /// DΦ at x(θ, s) as a row-major 2×2 matrix.
    pub fn dphi(&self, theta: f64, s: f64) -> [[f64; 2]; 2] {
        let (pt, ps) = self.chart_jacobian(theta, s);
        // inverse of the chart Jacobian [(R+s)(−sin, cos), (cos, sin)]
        let r = self.radius() + s;
        let (c, si) = (theta.cos(), theta.sin());
        // rows of J_X^{-1}: dθ/dx = (−sin, cos)/(R+s), ds/dx = (cos, sin)
        let dth = [-si / r, c / r];
        let ds = [c, si];
        [
            [pt[0] * dth[0] + ps[0] * ds[0], pt[0] * dth[1] + ps[0] * ds[1]],
            [pt[1] * dth[0] + ps[1] * ds[0], pt[1] * dth[1] + ps[1] * ds[1]],
        ]
    }

    /// det DΦ at x(θ, s).
    pub fn det(&self, theta: f64, s: f64) -> f64 {
        let m = self.dphi(theta, s);
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// |det[∂_θΦ, ∂_sΦ]|, the area element of the (θ, s) chart.
    pub fn chart_area(&self, theta: f64, s: f64) -> f64 {
        let (a, b) = self.chart_jacobian(theta, s);
        (a[0] * b[1] - a[1] * b[0]).abs()
    }
}

/// Pulled-back normal n[Φ] = (DΦ)^{-T} ν_Ω / |(DΦ)^{-T} ν_Ω| on the curve.
pub fn pullback_normal(ext: &TubularExtension, theta: f64) -> Result<Vec2> {
    let m = ext.dphi(theta, 0.0);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det.abs() > 1e-14) {
        return Err(Error::Geometry("singular extension differential".into()));
    }
    let nu = [theta.cos(), theta.sin()];
    // (DΦ)^{-T} = cof(DΦ)/det
    let v = [(m[1][1] * nu[0] - m[1][0] * nu[1]) / det, (-m[0][1] * nu[0] + m[0][0] * nu[1]) / det];
    let l = norm(v);
    Ok([v[0] / l, v[1] / l])
}
