//! Grids, periodic rules and the causal space-time convolution.

pub mod gk;
mod periodic;

pub use periodic::{
    diff_matrix, fourier_derivative, kress_log_weights, trig_interpolate, CardinalTable,
};

use crate::error::{invalid, Result};
use rayon::prelude::*;

/// Uniform time grid t_i = iT/M on [0, T].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final > 0.0) || !t_final.is_finite() {
            return invalid(format!("time horizon must be positive, got {t_final}"));
        }
        if steps < 2 {
            return invalid(format!("need at least 2 time steps, got {steps}"));
        }
        Ok(Self { t_final, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn step(&self) -> f64 {
        self.t_final / self.steps as f64
    }
    pub fn node(&self, i: usize) -> f64 {
        if i == self.steps {
            self.t_final
        } else {
            i as f64 * self.step()
        }
    }
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.node(i)).collect()
    }
}

/// N equispaced angles on [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceGrid {
    n: usize,
}

impl SpaceGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return invalid(format!("space grid needs an even N >= 8, got {n}"));
        }
        Ok(Self { n })
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn spacing(&self) -> f64 {
        std::f64::consts::TAU / self.n as f64
    }
    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }
    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.theta(j)).collect()
    }
}

/// How the kernel behaves as the time lag goes to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityClass {
    /// Bounded in the lag: trapezoid rule in time.
    Smooth,
    /// The kernel is s^{-1/2} g(s) with the caller supplying the bounded
    /// factor g; product integration against the weight s^{-1/2}.
    InverseSqrtTime,
}

fn check_density(time: &TimeGrid, ny: usize, f: &[Vec<f64>]) -> Result<()> {
    if f.len() != time.steps() + 1 {
        return invalid(format!("density has {} time rows, grid has {}", f.len(), time.steps() + 1));
    }
    if f.iter().any(|row| row.len() != ny) {
        return invalid("density row length differs from the number of source nodes");
    }
    Ok(())
}

/// K[G, f](t_i, x_p) ≈ ∫_0^{t_i} Σ_q w_q G(t_i − τ, p, q) f(τ, y_q) dτ.
///
/// `g(s, p, q)` is evaluated at lags s = Lh only. In space the rule is the
/// one given by `y_weights` (for a circle, the periodic trapezoid). In time
/// the samples are joined piecewise linearly; for the smooth class the
/// integrand G·f is integrated by the trapezoid rule, for the
/// inverse-square-root class the product g·f is joined linearly and the
/// weight s^{-1/2} is integrated exactly. Row 0 of the output is zero.
pub fn convolve<G>(
    time: &TimeGrid,
    targets: usize,
    y_weights: &[f64],
    g: G,
    f: &[Vec<f64>],
    class: SingularityClass,
) -> Result<Vec<Vec<f64>>>
where
    G: Fn(f64, usize, usize) -> f64 + Sync,
{
    let ny = y_weights.len();
    check_density(time, ny, f)?;
    let m = time.steps();
    let h = time.step();
    // lag-sampled kernel, shared across output times
    let lag: Vec<Vec<f64>> = (0..=m)
        .into_par_iter()
        .map(|l| {
            let s = l as f64 * h;
            let mut blk = vec![0.0; targets * ny];
            for p in 0..targets {
                for q in 0..ny {
                    blk[p * ny + q] = g(s, p, q) * y_weights[q];
                }
            }
            blk
        })
        .collect();
    let tw = time_weights(m, h, class);
    let out = (0..=m)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; targets];
            if i == 0 {
                return row;
            }
            for k in 0..=i {
                let w = tw(i, i - k);
                if w == 0.0 {
                    continue;
                }
                let blk = &lag[i - k];
                let fk = &f[k];
                for (p, r) in row.iter_mut().enumerate() {
                    let acc: f64 = blk[p * ny..(p + 1) * ny].iter().zip(fk).map(|(a, b)| a * b).sum();
                    *r += w * acc;
                }
            }
            row
        })
        .collect();
    Ok(out)
}

/// Time weight of lag node `l` in the integral up to t_i.
fn time_weights(m: usize, h: f64, class: SingularityClass) -> impl Fn(usize, usize) -> f64 + Sync {
    let _ = m;
    move |i: usize, l: usize| match class {
        SingularityClass::Smooth => {
            if l == 0 || l == i {
                0.5 * h
            } else {
                h
            }
        }
        SingularityClass::InverseSqrtTime => {
            // ∫ s^{-1/2} times hat functions on the lag grid
            let left = if l > 0 { sqrt_hat(l - 1, h, false) } else { 0.0 };
            let right = if l < i { sqrt_hat(l, h, true) } else { 0.0 };
            left + right
        }
    }
}

/// ∫_{Lh}^{(L+1)h} s^{-1/2} φ(s) ds where φ is the linear hat equal to 1 at
/// the left end (`left = true`) or at the right end.
fn sqrt_hat(l: usize, h: f64, left: bool) -> f64 {
    let a = l as f64 * h;
    let b = a + h;
    let m0 = 2.0 * (b.sqrt() - a.sqrt());
    let m1 = (2.0 / 3.0) * (b.powf(1.5) - a.powf(1.5)) - a * m0;
    let rising = m1 / h;
    if left {
        m0 - rising
    } else {
        rising
    }
}

/// Outcome of a block-Toeplitz comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ToeplitzCheck {
    Holds { max_deviation: f64 },
    Violated { max_deviation: f64 },
    NotApplicable,
}

impl ToeplitzCheck {
    pub fn holds(&self) -> bool {
        matches!(self, ToeplitzCheck::Holds { .. })
    }
}

/// Compares directly assembled blocks `direct[i][j]` (j ≤ i, each flattened)
/// with the lag blocks `lag[i − j]`. The grid `nodes` must be uniform,
/// otherwise lag structure is meaningless and the check is not applicable.
pub fn toeplitz_check(nodes: &[f64], direct: &[Vec<Vec<f64>>], lag: &[Vec<f64>], tol: f64) -> ToeplitzCheck {
    if nodes.len() < 3 {
        return ToeplitzCheck::NotApplicable;
    }
    let h = nodes[1] - nodes[0];
    let uniform = nodes.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.abs());
    if !uniform {
        return ToeplitzCheck::NotApplicable;
    }
    let mut dev = 0.0f64;
    for (i, row) in direct.iter().enumerate() {
        for (j, blk) in row.iter().enumerate().take(i + 1) {
            let Some(ref_blk) = lag.get(i - j) else {
                return ToeplitzCheck::Violated { max_deviation: f64::INFINITY };
            };
            if ref_blk.len() != blk.len() {
                return ToeplitzCheck::Violated { max_deviation: f64::INFINITY };
            }
            for (a, b) in blk.iter().zip(ref_blk) {
                dev = dev.max((a - b).abs());
            }
        }
    }
    if dev <= tol {
        ToeplitzCheck::Holds { max_deviation: dev }
    } else {
        ToeplitzCheck::Violated { max_deviation: dev }
    }
}

/// The two sides of |K[G, f]| ≤ ‖G‖_∞ ‖f‖_{L¹}: the sup of the discrete
/// convolution and the product of the sampled kernel sup with the discrete
/// L¹ norm of f (same space and time rules).
pub fn norm_bound_probe<G>(
    time: &TimeGrid,
    targets: usize,
    y_weights: &[f64],
    g: G,
    f: &[Vec<f64>],
) -> Result<(f64, f64)>
where
    G: Fn(f64, usize, usize) -> f64 + Sync,
{
    let k = convolve(time, targets, y_weights, &g, f, SingularityClass::Smooth)?;
    let k_sup = k.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let m = time.steps();
    let h = time.step();
    let mut g_sup = 0.0f64;
    for l in 0..=m {
        for p in 0..targets {
            for q in 0..y_weights.len() {
                g_sup = g_sup.max(g(l as f64 * h, p, q).abs());
            }
        }
    }
    let mut l1 = 0.0;
    for (i, row) in f.iter().enumerate() {
        let tw = if i == 0 || i == m { 0.5 * h } else { h };
        l1 += tw * row.iter().zip(y_weights).map(|(v, w)| v.abs() * w.abs()).sum::<f64>();
    }
    Ok((k_sup, g_sup * l1))
}
