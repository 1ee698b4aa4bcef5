use super::annulus::{AnnulusField, Shell};
use super::weak::chart_gradient;
use crate::error::{invalid, Result};
use crate::geometry::TubularExtension;
use crate::Vec2;
use std::f64::consts::TAU;

/// Energy balance of a field pair on the collar, per grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    /// e(t) = Σ_± ∫ (v^±)² dy.
    pub energy: Vec<f64>,
    /// de/dt by second-order finite differences in time.
    pub energy_rate: Vec<f64>,
    /// 2 Σ_± ∫ |∇v^±|² dy.
    pub dissipation: Vec<f64>,
    /// 2 × (signed boundary fluxes ∫ v ∂_n v dσ on all four shell edges).
    pub boundary: Vec<f64>,
    /// |de/dt + dissipation − boundary|.
    pub residual: Vec<f64>,
}

impl EnergyReport {
    /// Residual over max(|de/dt|, dissipation) at each time.
    pub fn relative_residual(&self) -> Vec<f64> {
        self.residual
            .iter()
            .zip(&self.energy_rate)
            .zip(&self.dissipation)
            .map(|((r, d), q)| {
                let s = d.abs().max(*q);
                if s > 0.0 {
                    r / s
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Physical gradient ∇v from chart derivatives, J = [∂_θΦ, ∂_sΦ].
fn physical_gradient(jac: (Vec2, Vec2), d: [f64; 2]) -> Vec2 {
    let (a, b) = jac;
    let det = a[0] * b[1] - a[1] * b[0];
    // J^{-T} d
    [(b[1] * d[0] - a[1] * d[1]) / det, (-b[0] * d[0] + a[0] * d[1]) / det]
}

/// Per-time (∫v², ∫|∇v|², Σ edge fluxes) on one shell.
fn shell_terms(ext: &TubularExtension, u: &AnnulusField) -> Vec<[f64; 3]> {
    let g = u.grid;
    let grad = chart_gradient(u);
    let dth = TAU / g.n_theta as f64;
    let cell = dth * g.ds();
    let far = g.n_s - 1;
    // outward orientation: the interface edge faces increasing s on the
    // inner shell, the far edge faces away from the interface
    let edge_sign = |k: usize| match (g.shell, k == 0) {
        (Shell::Plus, true) | (Shell::Minus, false) => 1.0,
        _ => -1.0,
    };
    (0..=g.time.steps())
        .map(|i| {
            let mut acc = [0.0; 3];
            for j in 0..g.n_theta {
                let th = g.theta(j);
                for k in 0..g.n_s {
                    let s = g.s(k);
                    let jac = ext.chart_jacobian(th, s);
                    let area = ext.chart_area(th, s);
                    let idx = g.index(i, j, k);
                    let v = u.values[idx];
                    let gv = physical_gradient(jac, grad[idx]);
                    let w = if k == 0 || k == far { 0.5 } else { 1.0 };
                    acc[0] += w * cell * area * v * v;
                    acc[1] += w * cell * area * (gv[0] * gv[0] + gv[1] * gv[1]);
                    if k == 0 || k == far {
                        // ∂_n v dσ with n the clockwise rotation of ∂_θΦ, normalized
                        let pt = jac.0;
                        let flux = gv[0] * pt[1] - gv[1] * pt[0];
                        acc[2] += edge_sign(k) * dth * v * flux;
                    }
                }
            }
            acc
        })
        .collect()
}

/// Energy identity monitor for a field pair on the two shells:
/// de/dt = −2 Σ_± ∫|∇v^±|² + 2 Σ (boundary fluxes), which holds for caloric v^±.
pub fn energy_monitor(ext: &TubularExtension, plus: &AnnulusField, minus: &AnnulusField) -> Result<EnergyReport> {
    if plus.grid.shell != Shell::Plus || minus.grid != plus.grid.mirrored() {
        return invalid("energy monitor needs matching inner and outer shell fields");
    }
    let time = plus.grid.time;
    let m = time.steps();
    let h = time.step();
    let a = shell_terms(ext, plus);
    let b = shell_terms(ext, minus);
    let energy: Vec<f64> = (0..=m).map(|i| a[i][0] + b[i][0]).collect();
    let dissipation: Vec<f64> = (0..=m).map(|i| 2.0 * (a[i][1] + b[i][1])).collect();
    let boundary: Vec<f64> = (0..=m).map(|i| 2.0 * (a[i][2] + b[i][2])).collect();
    let energy_rate: Vec<f64> = (0..=m)
        .map(|i| {
            if i == 0 {
                (-1.5 * energy[0] + 2.0 * energy[1] - 0.5 * energy[2]) / h
            } else if i == m {
                (1.5 * energy[m] - 2.0 * energy[m - 1] + 0.5 * energy[m - 2]) / h
            } else {
                (energy[i + 1] - energy[i - 1]) / (2.0 * h)
            }
        })
        .collect();
    let residual = (0..=m).map(|i| (energy_rate[i] + dissipation[i] - boundary[i]).abs()).collect();
    Ok(EnergyReport { times: time.nodes(), energy, energy_rate, dissipation, boundary, residual })
}
