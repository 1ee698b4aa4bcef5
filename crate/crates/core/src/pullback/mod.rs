//! Layer potentials transported to the fixed collar around the reference
//! circle: annulus fields, the weak form of the pulled-back heat equation,
//! transmission-problem residuals and the energy balance.

mod annulus;
mod energy;
mod transmission;
mod weak;

pub use annulus::{AnnulusField, AnnulusGrid, Shell};
pub use energy::{energy_monitor, EnergyReport};
pub use transmission::{layer_fields, shell_operator, transmission_verify, LayerKind, ShellKind, ShellSamples, TransmissionResiduals, SHELL_OFFSETS};
pub use weak::{b_omega, test_family, weak_heat_residual, TestFunction, WeakPair};

#[cfg(test)]
mod tests;
