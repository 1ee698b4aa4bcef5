use super::annulus::{one_sided_normal_derivative, AnnulusField, AnnulusGrid, Shell};
use super::weak::{b_omega, test_family, weak_heat_residual, WeakPair};
use crate::error::{invalid, Result};
use crate::geometry::TubularExtension;
use crate::potentials::{Evaluator, Kernel, SpaceTimeDensity};
use rayon::prelude::*;

/// Offsets per shell in the annulus grids used for verification.
pub const SHELL_OFFSETS: usize = 17;

/// Shell operator kind: single layer or double layer evaluated on |s| = δ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShellKind {
    VShell,
    WShell,
}

/// Layer potential family checked by [`transmission_verify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Single,
    Double,
}

impl LayerKind {
    pub fn kernel(self) -> Kernel {
        match self {
            LayerKind::Single => Kernel::Single,
            LayerKind::Double => Kernel::Double,
        }
    }
}

/// Values of a shell operator at (t_i, Φ(θ_j, ∓δ)), stored (M+1) × N.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellSamples {
    pub shell: Shell,
    pub n: usize,
    pub values: Vec<f64>,
}

impl ShellSamples {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// The layer potential evaluated on the far edge of a shell. Each sample
/// is an independent quadrature at its own time (no lag-weight reuse),
/// which makes it a second code path next to the annulus fields.
pub fn shell_operator(kind: ShellKind, ext: &TubularExtension, mu: &SpaceTimeDensity, shell: Shell) -> Result<ShellSamples> {
    let ev = Evaluator::new(ext.base(), *mu.time(), *mu.space());
    let kernel = match kind {
        ShellKind::VShell => Kernel::Single,
        ShellKind::WShell => Kernel::Double,
    };
    let (n, m) = (mu.space().len(), mu.time().steps());
    let s = shell.sign() * ext.delta();
    let cols: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let x = ext.point(mu.space().theta(j), s);
            (0..=m).map(|i| Ok(ev.value(kernel, mu, mu.time().node(i), x)?.value)).collect()
        })
        .collect();
    let mut values = vec![0.0; (m + 1) * n];
    for (j, c) in cols.into_iter().enumerate() {
        for (i, v) in c?.into_iter().enumerate() {
            values[i * n + j] = v;
        }
    }
    Ok(ShellSamples { shell, n, values })
}

/// Sup-norm residuals of the transmission problem characterizing a layer
/// potential, all relative to max(max|μ|, max|U^±|) except the weak
/// residuals, which are self-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransmissionResiduals {
    pub interface_value_residual: f64,
    pub conormal_jump_residual: f64,
    pub shell_trace_residual_plus: f64,
    pub shell_trace_residual_minus: f64,
    pub weak_residual_plus: f64,
    pub weak_residual_minus: f64,
    pub initial_residual: f64,
    /// Interface samples whose extrapolation ladder failed the ratio test.
    pub interface_ladder_failures: usize,
    /// Conormal samples whose extrapolation ladder failed the ratio test.
    pub conormal_ladder_failures: usize,
}

impl TransmissionResiduals {
    pub const LABELS: [&'static str; 7] = [
        "interface_value",
        "conormal_jump",
        "shell_trace_plus",
        "shell_trace_minus",
        "weak_plus",
        "weak_minus",
        "initial",
    ];

    pub fn values(&self) -> [f64; 7] {
        [
            self.interface_value_residual,
            self.conormal_jump_residual,
            self.shell_trace_residual_plus,
            self.shell_trace_residual_minus,
            self.weak_residual_plus,
            self.weak_residual_minus,
            self.initial_residual,
        ]
    }

    pub fn max(&self) -> f64 {
        self.values().iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// Both shell fields of a layer potential plus interface ladder failures.
pub fn layer_fields(
    ext: &TubularExtension,
    ev: &Evaluator,
    mu: &SpaceTimeDensity,
    kind: LayerKind,
    n_s: usize,
) -> Result<(AnnulusField, AnnulusField, usize)> {
    let grid = AnnulusGrid::new(*mu.time(), mu.space().len(), n_s, ext.delta(), Shell::Plus)?;
    let (up, fp) = AnnulusField::from_potential(ext, ev, mu, kind.kernel(), grid)?;
    let (um, fm) = AnnulusField::from_potential(ext, ev, mu, kind.kernel(), grid.mirrored())?;
    Ok((up, um, fp + fm))
}

/// Checks that the pulled-back layer potential of μ solves the transmission
/// problem with data g (value jump), g₁ (normal-derivative jump) and the
/// shell operators as outer traces.
pub fn transmission_verify(ext: &TubularExtension, mu: &SpaceTimeDensity, kind: LayerKind) -> Result<TransmissionResiduals> {
    let ev = Evaluator::new(ext.base(), *mu.time(), *mu.space());
    if ext.base().shape_hash() != ev.phi().shape_hash() {
        return invalid("extension and evaluator disagree");
    }
    let (n, m) = (mu.space().len(), mu.time().steps());
    let (up, um, interface_fail) = layer_fields(ext, &ev, mu, kind, SHELL_OFFSETS)?;
    let scale = mu.max_abs().max(up.max_abs()).max(um.max_abs());
    if scale == 0.0 {
        return Ok(TransmissionResiduals::default());
    }
    let mut r = TransmissionResiduals { interface_ladder_failures: interface_fail, ..Default::default() };

    let far = SHELL_OFFSETS - 1;
    for i in 0..=m {
        for j in 0..n {
            let g = match kind {
                LayerKind::Single => 0.0,
                LayerKind::Double => -mu.at(i, j),
            };
            let jump = up.at(i, j, 0) - um.at(i, j, 0) - g;
            r.interface_value_residual = r.interface_value_residual.max(jump.abs());
        }
        if i == 0 {
            for j in 0..n {
                for k in 0..SHELL_OFFSETS {
                    r.initial_residual = r.initial_residual.max(up.at(0, j, k).abs()).max(um.at(0, j, k).abs());
                }
            }
        }
    }

    let dn: Vec<Result<(Vec<f64>, usize)>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let th = mu.space().theta(j);
            let (p, fp) = one_sided_normal_derivative(&ev, mu, kind.kernel(), Shell::Plus, th)?;
            let (q, fq) = one_sided_normal_derivative(&ev, mu, kind.kernel(), Shell::Minus, th)?;
            Ok((p.iter().zip(&q).map(|(a, b)| a - b).collect(), fp + fq))
        })
        .collect();
    for (j, d) in dn.into_iter().enumerate() {
        let (jump, fails) = d?;
        r.conormal_ladder_failures += fails;
        for (i, v) in jump.iter().enumerate() {
            let g1 = match kind {
                LayerKind::Single => mu.at(i, j),
                LayerKind::Double => 0.0,
            };
            r.conormal_jump_residual = r.conormal_jump_residual.max((v - g1).abs());
        }
    }

    let shell_kind = match kind {
        LayerKind::Single => ShellKind::VShell,
        LayerKind::Double => ShellKind::WShell,
    };
    for (field, out) in [(&up, &mut r.shell_trace_residual_plus), (&um, &mut r.shell_trace_residual_minus)] {
        let s = shell_operator(shell_kind, ext, mu, field.grid.shell)?;
        for i in 0..=m {
            for j in 0..n {
                *out = out.max((field.at(i, j, far) - s.at(i, j)).abs());
            }
        }
    }

    let family = test_family();
    for (field, out) in [(&up, &mut r.weak_residual_plus), (&um, &mut r.weak_residual_minus)] {
        let pair = b_omega(ext, field)?;
        *out = weak_heat_residual(&pair, &WeakPair::zeros(field.grid, ext.radius()), &family)?;
    }

    for v in [
        &mut r.interface_value_residual,
        &mut r.conormal_jump_residual,
        &mut r.shell_trace_residual_plus,
        &mut r.shell_trace_residual_minus,
        &mut r.initial_residual,
    ] {
        *v /= scale;
    }
    Ok(r)
}
