//! Layer heat potentials supported on parametrized planar curves.
//!
//! The crate assembles space-time Nystrom discretizations of the single
//! layer, gradient and double layer heat operators pulled back to a fixed
//! reference circle, evaluates the potentials off the boundary, checks the
//! jump relations and the transmission characterization of the potentials
//! on a tubular collar, and measures how the discrete operators vary along
//! one-parameter families of boundary parametrizations.
//!
//! Module map:
//! - [`kernels`]: heat kernel, its gradient, exact time-slab integrals.
//! - [`geometry`]: boundary maps, normals, tubular extensions.
//! - [`quadrature`]: grids, periodic rules, the generic causal convolution.
//! - [`potentials`]: densities, operator matrices, off-boundary evaluation.
//! - [`pullback`]: annulus fields, weak residuals, transmission and energy checks.
//! - [`analysis`]: parabolic Holder norms, superposition, shape derivatives.
//! - [`cli`]: the experiment runner behind the `heatpot` binary.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod potentials;
pub mod pullback;
pub mod quadrature;

pub use error::{Error, Result};

/// Planar point / vector.
pub type Vec2 = [f64; 2];

#[inline]
pub(crate) fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}
