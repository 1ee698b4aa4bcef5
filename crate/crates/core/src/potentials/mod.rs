//! Layer heat potentials: densities, off-boundary evaluation, Nyström
//! matrices of the pulled-back boundary operators, and jump probes.
//!
//! Time is discretized by joining density samples linearly and integrating
//! the kernel exactly over each time slab; space by the periodic trapezoid
//! with singularity-aware corrections on the first slab, where the kernel
//! is singular on the diagonal.

mod density;
mod evaluator;
mod jump;
mod operator;
pub mod slab;

pub use density::SpaceTimeDensity;
pub use evaluator::{double_layer_eval, single_layer_eval, single_layer_gradient, Evaluation, Evaluator};
pub use jump::{
    identity_crosscheck, jump_probe, jump_probe_with, normal_derivative_probe, richardson3, ApproachSide, CrosscheckReport,
    JumpKind, EPS_LADDER, FD_LADDER,
};
pub use operator::{assemble, assemble_direct, BoundaryOperatorMatrix, OperatorKind};
pub use slab::Kernel;
