use crate::error::{invalid, Result};
use crate::geometry::{normal_of_map, TubularExtension};
use crate::potentials::{richardson3, Evaluator, Kernel, SpaceTimeDensity, EPS_LADDER};
use crate::quadrature::TimeGrid;
use crate::Vec2;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Which half of the collar: `Plus` is s ∈ [−δ, 0] (mapped inside the
/// curve), `Minus` is s ∈ [0, δ].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shell {
    Plus,
    Minus,
}

impl Shell {
    /// Sign of s on this shell.
    pub fn sign(self) -> f64 {
        match self {
            Shell::Plus => -1.0,
            Shell::Minus => 1.0,
        }
    }
}

/// Time × angle × offset grid on one shell. Offsets run from the interface
/// (k = 0, s = 0) to the far edge (k = K − 1, |s| = δ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusGrid {
    pub time: TimeGrid,
    pub n_theta: usize,
    pub n_s: usize,
    pub delta: f64,
    pub shell: Shell,
}

impl AnnulusGrid {
    pub fn new(time: TimeGrid, n_theta: usize, n_s: usize, delta: f64, shell: Shell) -> Result<Self> {
        if n_theta < 8 || !n_theta.is_multiple_of(2) {
            return invalid("annulus grid needs an even angle count >= 8");
        }
        if n_s < 3 {
            return invalid("annulus grid needs at least 3 offsets");
        }
        if !(delta > 0.0) {
            return invalid("annulus grid needs delta > 0");
        }
        Ok(Self { time, n_theta, n_s, delta, shell })
    }

    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_theta as f64
    }
    pub fn ds(&self) -> f64 {
        self.delta / (self.n_s - 1) as f64
    }
    pub fn s(&self, k: usize) -> f64 {
        self.shell.sign() * k as f64 * self.ds()
    }
    pub fn len(&self) -> usize {
        (self.time.steps() + 1) * self.n_theta * self.n_s
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_theta + j) * self.n_s + k
    }
    pub fn mirrored(&self) -> Self {
        let shell = match self.shell {
            Shell::Plus => Shell::Minus,
            Shell::Minus => Shell::Plus,
        };
        Self { shell, ..*self }
    }
}

/// Samples u(t_i, θ_j, s_k) of a field on one shell.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusField {
    pub grid: AnnulusGrid,
    pub values: Vec<f64>,
}

impl AnnulusField {
    pub fn zeros(grid: AnnulusGrid) -> Self {
        Self { values: vec![0.0; grid.len()], grid }
    }

    /// Pullback u = f∘Φ^T of a space-time function given in physical coordinates.
    pub fn from_physical(ext: &TubularExtension, grid: AnnulusGrid, f: impl Fn(f64, Vec2) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        for i in 0..=grid.time.steps() {
            let t = grid.time.node(i);
            for j in 0..grid.n_theta {
                for k in 0..grid.n_s {
                    values[grid.index(i, j, k)] = f(t, ext.point(grid.theta(j), grid.s(k)));
                }
            }
        }
        Self { grid, values }
    }

    /// Samples given directly in chart coordinates (t, θ, s).
    pub fn from_chart(grid: AnnulusGrid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        for i in 0..=grid.time.steps() {
            for j in 0..grid.n_theta {
                for k in 0..grid.n_s {
                    values[grid.index(i, j, k)] = f(grid.time.node(i), grid.theta(j), grid.s(k));
                }
            }
        }
        Self { grid, values }
    }

    /// Pullback of a layer potential. Off the interface each point's full
    /// history comes from one set of lag weights; the interface row is the
    /// one-sided limit along ν_φ, extrapolated from the offsets in
    /// [`EPS_LADDER`]. Returns the field and the number of interface samples
    /// whose ladder failed the ratio test (those keep the raw extrapolation).
    pub fn from_potential(
        ext: &TubularExtension,
        ev: &Evaluator,
        mu: &SpaceTimeDensity,
        kernel: Kernel,
        grid: AnnulusGrid,
    ) -> Result<(Self, usize)> {
        if mu.time() != &grid.time {
            return invalid("density and annulus use different time grids");
        }
        let m = grid.time.steps();
        let cols: Vec<Result<(Vec<Vec<f64>>, usize)>> = (0..grid.n_theta)
            .into_par_iter()
            .map(|j| {
                let th = grid.theta(j);
                let mut hist = Vec::with_capacity(grid.n_s);
                let tr = one_sided_trace(ev, mu, kernel, grid.shell, th)?;
                hist.push(tr.0);
                for k in 1..grid.n_s {
                    hist.push(ev.history(kernel, mu, ext.point(th, grid.s(k)))?);
                }
                Ok((hist, tr.1))
            })
            .collect();
        let mut values = vec![0.0; grid.len()];
        let mut failures = 0;
        for (j, c) in cols.into_iter().enumerate() {
            let (hist, f) = c?;
            failures += f;
            for (k, h) in hist.iter().enumerate() {
                for i in 0..=m {
                    values[grid.index(i, j, k)] = h[i];
                }
            }
        }
        Ok((Self { grid, values }, failures))
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.grid.index(i, j, k)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return invalid("fields live on different grids");
        }
        Ok(Self { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() })
    }
}

/// Time history of the one-sided limit at φ(θ) from the given shell.
pub(crate) fn one_sided_trace(ev: &Evaluator, mu: &SpaceTimeDensity, kernel: Kernel, shell: Shell, theta: f64) -> Result<(Vec<f64>, usize)> {
    let phi = ev.phi();
    let p = phi.point(theta);
    let nu = normal_of_map(phi, theta);
    let h: Vec<Vec<f64>> = EPS_LADDER
        .iter()
        .map(|e| {
            let s = shell.sign() * e;
            ev.history(kernel, mu, [p[0] + s * nu[0], p[1] + s * nu[1]])
        })
        .collect::<Result<_>>()?;
    let mut fails = 0;
    let out = (0..h[0].len())
        .map(|i| {
            let f = [h[0][i], h[1][i], h[2][i]];
            richardson3(f).unwrap_or_else(|_| {
                fails += 1;
                2.0 * f[2] - f[1]
            })
        })
        .collect();
    Ok((out, fails))
}

/// Time history of the one-sided normal derivative ∂_ν at φ(θ) from the
/// given shell, by forward quotients (u(2ε) − u(ε))/ε extrapolated in ε.
pub(crate) fn one_sided_normal_derivative(
    ev: &Evaluator,
    mu: &SpaceTimeDensity,
    kernel: Kernel,
    shell: Shell,
    theta: f64,
) -> Result<(Vec<f64>, usize)> {
    let phi = ev.phi();
    let p = phi.point(theta);
    let nu = normal_of_map(phi, theta);
    let at = |d: f64| {
        let s = shell.sign() * d;
        ev.history(kernel, mu, [p[0] + s * nu[0], p[1] + s * nu[1]])
    };
    let ladder = crate::potentials::FD_LADDER;
    let mut q = Vec::with_capacity(3);
    for e in ladder {
        let (a, b) = (at(e)?, at(2.0 * e)?);
        q.push(a.iter().zip(&b).map(|(x, y)| shell.sign() * (y - x) / e).collect::<Vec<f64>>());
    }
    let mut fails = 0;
    let out = (0..q[0].len())
        .map(|i| {
            let f = [q[0][i], q[1][i], q[2][i]];
            richardson3(f).unwrap_or_else(|_| {
                fails += 1;
                2.0 * f[2] - f[1]
            })
        })
        .collect();
    Ok((out, fails))
}
