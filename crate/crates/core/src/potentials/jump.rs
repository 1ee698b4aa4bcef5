use super::density::SpaceTimeDensity;
use super::evaluator::Evaluator;
use super::operator::{assemble, OperatorKind};
use super::slab::Kernel;
use crate::error::{Error, Result};
use crate::geometry::{normal_of_map, BoundaryMap, TubularExtension};
use crate::quadrature::fourier_derivative;
use crate::Vec2;

/// Normal offsets of the one-sided ladder, coarse to fine.
pub const EPS_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Quantity whose one-sided boundary limit is probed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    /// ∂_ν of the single layer.
    SingleNormal,
    /// ∂_{x_l} of the single layer.
    SinglePartial(usize),
    /// Value of the double layer.
    DoubleValue,
}

/// Approach side: `Plus` from the interior, `Minus` from the exterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproachSide {
    Plus,
    Minus,
}

impl ApproachSide {
    pub fn sign(self) -> f64 {
        match self {
            ApproachSide::Plus => -1.0,
            ApproachSide::Minus => 1.0,
        }
    }
}

/// Order-one Richardson limit of three samples on a halving ladder, with a
/// ratio test on successive differences.
pub fn richardson3(f: [f64; 3]) -> Result<f64> {
    let d1 = f[0] - f[1];
    let d2 = f[1] - f[2];
    if d2.abs() <= 1e-8 * (1.0 + f[2].abs()) {
        return Ok(2.0 * f[2] - f[1]);
    }
    let ratio = d1 / d2;
    if !(ratio > 0.0 && ratio <= 8.0) {
        return Err(Error::NotConverged(format!("difference ratio {ratio:.3} on samples {f:?}")));
    }
    Ok(2.0 * f[2] - f[1])
}

fn kernel_for(kind: JumpKind, nu: Vec2) -> Kernel {
    match kind {
        JumpKind::SingleNormal => Kernel::Gradient(nu),
        JumpKind::SinglePartial(l) => {
            let mut e = [0.0, 0.0];
            e[l.min(1)] = 1.0;
            Kernel::Gradient(e)
        }
        JumpKind::DoubleValue => Kernel::Double,
    }
}

/// One-sided limit at φ(θ), time t, of the named quantity.
pub fn jump_probe_with(ev: &Evaluator, mu: &SpaceTimeDensity, kind: JumpKind, side: ApproachSide, t: f64, theta: f64) -> Result<f64> {
    let phi = ev.phi();
    let p = phi.point(theta);
    let nu = normal_of_map(phi, theta);
    let ker = kernel_for(kind, nu);
    let mut f = [0.0; 3];
    for (k, eps) in EPS_LADDER.iter().enumerate() {
        let s = side.sign() * eps;
        f[k] = ev.value(ker, mu, t, [p[0] + s * nu[0], p[1] + s * nu[1]])?.value;
    }
    richardson3(f)
}

/// One-sided limit at φ(θ), time t, of the named quantity.
pub fn jump_probe(phi: &BoundaryMap, mu: &SpaceTimeDensity, kind: JumpKind, side: ApproachSide, t: f64, theta: f64) -> Result<f64> {
    let ev = Evaluator::new(phi, *mu.time(), *mu.space());
    jump_probe_with(&ev, mu, kind, side, t, theta)
}

/// Outcome of the boundary-operator identities checked against interior
/// gradients of the single layer.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    /// max |V_l μ − (−n_l μ/2 + ∂_l v⁺)| / scale for l = 1, 2.
    pub vl: [f64; 2],
    /// max |W_* μ − (−μ/2 + ∇v⁺ · n)| / scale.
    pub w_star: f64,
    pub scale: f64,
}

impl CrosscheckReport {
    pub fn max(&self) -> f64 {
        self.vl[0].max(self.vl[1]).max(self.w_star)
    }
}

/// Compares V_l and W_* with −(n/2)μ + ∇v⁺, where ∇v⁺ is the interior
/// gradient rebuilt from the chart derivatives of V⁺ = v∘Φ: the θ-derivative
/// of the boundary trace V μ and a second-order one-sided s-difference with
/// step `eps` inside the collar. Every `stride`-th angle is checked at all
/// grid times.
pub fn identity_crosscheck(ext: &TubularExtension, mu: &SpaceTimeDensity, eps: f64, stride: usize) -> Result<CrosscheckReport> {
    let phi = ext.base();
    let time = *mu.time();
    let space = *mu.space();
    let n = space.len();
    let m = time.steps();
    let ev = Evaluator::new(phi, time, space);
    let trace = assemble(OperatorKind::V, phi, time, space)?.apply(mu)?;
    let vl: Vec<Vec<f64>> = (0..2).map(|l| assemble(OperatorKind::Vl(l), phi, time, space)?.apply(mu)).collect::<Result<_>>()?;
    let ws = assemble(OperatorKind::WStar, phi, time, space)?.apply(mu)?;
    let mut err = [0.0f64; 3];
    let mut scale = 0.5 * mu.max_abs();
    for w in vl.iter().chain(std::iter::once(&ws)) {
        scale = scale.max(w.iter().fold(0.0, |a, v| a.max(v.abs())));
    }
    for j in (0..n).step_by(stride.max(1)) {
        let th = space.theta(j);
        let h1 = ev.history(Kernel::Single, mu, ext.point(th, -eps))?;
        let h2 = ev.history(Kernel::Single, mu, ext.point(th, -2.0 * eps))?;
        let (pt, ps) = ext.chart_jacobian(th, 0.0);
        let det = pt[0] * ps[1] - pt[1] * ps[0];
        let nrm = crate::geometry::pullback_normal(ext, th)?;
        for i in 1..=m {
            let row: Vec<f64> = trace[i * n..(i + 1) * n].to_vec();
            let du_th = fourier_derivative(&row)[j];
            let du_s = (3.0 * row[j] - 4.0 * h1[i] + h2[i]) / (2.0 * eps);
            // ∇v solves [∂_θΦ ∂_sΦ]^T ∇v = (∂_θ u, ∂_s u)
            let g = [(ps[1] * du_th - pt[1] * du_s) / det, (-ps[0] * du_th + pt[0] * du_s) / det];
            let muv = mu.at(i, j);
            for l in 0..2 {
                let rhs = -0.5 * nrm[l] * muv + g[l];
                err[l] = err[l].max((vl[l][i * n + j] - rhs).abs());
            }
            let rhs = -0.5 * muv + g[0] * nrm[0] + g[1] * nrm[1];
            err[2] = err[2].max((ws[i * n + j] - rhs).abs());
        }
    }
    let s = if scale > 0.0 { scale } else { 1.0 };
    Ok(CrosscheckReport { vl: [err[0] / s, err[1] / s], w_star: err[2] / s, scale })
}

/// Offsets used by one-sided difference quotients; the quotient at ε uses
/// the points at ε and 2ε, so the ladder reaches 2·10⁻².
pub const FD_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// One-sided normal derivative ∂_ν of the potential with kernel `kernel` at
/// φ(θ), from forward quotients (u(2ε) − u(ε))/ε along ν_φ extrapolated in ε.
pub fn normal_derivative_probe(ev: &Evaluator, mu: &SpaceTimeDensity, kernel: Kernel, side: ApproachSide, t: f64, theta: f64) -> Result<f64> {
    let phi = ev.phi();
    let p = phi.point(theta);
    let nu = normal_of_map(phi, theta);
    let at = |d: f64| -> Result<f64> {
        let s = side.sign() * d;
        Ok(ev.value(kernel, mu, t, [p[0] + s * nu[0], p[1] + s * nu[1]])?.value)
    };
    let mut q = [0.0; 3];
    for (k, eps) in FD_LADDER.iter().enumerate() {
        q[k] = side.sign() * (at(2.0 * eps)? - at(*eps)?) / eps;
    }
    richardson3(q)
}
