//! Hölder norm estimates, the superposition operator and finite-difference
//! probes of how boundary operators depend on the parametrization.

mod holder;
mod shape;
mod superpose;

pub use holder::{parabolic_norm, HolderEstimate, PairSampling, SampledField};
pub use shape::{shape_derivative, smoothness_report, stencil, PathSampler, ShapeDerivative, ShapePath, SmoothnessRow, SMOOTHNESS_HEADER};
pub use superpose::{superpose, superpose_pair};

use crate::error::Result;
use crate::geometry::BoundaryMap;
use crate::potentials::{assemble, OperatorKind, SpaceTimeDensity};
use crate::quadrature::{SpaceGrid, TimeGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A smooth random density vanishing at t = 0: trigonometric degree 4 in θ
/// with coefficients in [−1, 1], times a random combination of t and t².
pub fn random_density(time: TimeGrid, space: SpaceGrid, seed: u64) -> SpaceTimeDensity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<[f64; 2]> = (0..=4).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let (p, q) = (rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5));
    SpaceTimeDensity::from_fn(time, space, |t, th| {
        let s: f64 = c.iter().enumerate().map(|(k, a)| a[0] * (k as f64 * th).cos() + a[1] * (k as f64 * th).sin()).sum();
        (p * t + q * t * t) * s
    })
}

/// ‖Aμ‖ / ‖μ‖ in the order-0 parabolic norm on the reference circle for
/// each seed, with A the assembled operator of the given kind.
pub fn operator_norm_ratios(
    kind: OperatorKind,
    phi: &BoundaryMap,
    time: TimeGrid,
    space: SpaceGrid,
    alpha: f64,
    seeds: &[u64],
    sampling: PairSampling,
) -> Result<Vec<f64>> {
    let op = assemble(kind, phi, time, space)?;
    let r = phi.radius();
    seeds
        .iter()
        .map(|&seed| {
            let mu = random_density(time, space, seed);
            let out = SpaceTimeDensity::new(time, space, op.apply(&mu)?)?;
            let num = parabolic_norm(&SampledField::on_circle(&out, r), alpha, 0, sampling)?.norm();
            let den = parabolic_norm(&SampledField::on_circle(&mu, r), alpha, 0, sampling)?.norm();
            Ok(num / den)
        })
        .collect()
}

#[cfg(test)]
mod tests;
