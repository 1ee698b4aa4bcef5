use super::density::SpaceTimeDensity;
use super::slab::{lag_weights, weights_at, GeomCache, Kernel, Target, TargetWeights};
use crate::error::{invalid, Error, Result};
use crate::geometry::BoundaryMap;
use crate::quadrature::{SpaceGrid, TimeGrid};
use crate::Vec2;
use std::f64::consts::TAU;

/// Targets closer than this many boundary grid spacings are flagged.
pub const NEAR_SPACINGS: f64 = 3.0;

/// An off-boundary potential value with an accuracy marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// Set when the target is within three boundary grid spacings of the
    /// curve or the fine grid hit its size cap.
    pub near_boundary: bool,
}

/// Evaluates layer potentials with a fixed curve and density grid at
/// arbitrary off-boundary points.
pub struct Evaluator {
    cache: GeomCache,
    time: TimeGrid,
    space: SpaceGrid,
}

impl Evaluator {
    pub fn new(phi: &BoundaryMap, time: TimeGrid, space: SpaceGrid) -> Self {
        Self { cache: GeomCache::new(phi, space.len()), time, space }
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }
    pub fn space(&self) -> &SpaceGrid {
        &self.space
    }
    pub fn phi(&self) -> &BoundaryMap {
        self.cache.phi()
    }

    fn check(&self, x: Vec2) -> Result<bool> {
        let dist = self.cache.distance(x);
        if !(dist > 1e-9) {
            return Err(Error::InvalidInput("target lies on the curve".into()));
        }
        let spacing = self.cache.speed_max() * TAU / self.space.len() as f64;
        let (_, capped) = self.cache.refinement(0.0, self.time.step(), dist);
        Ok(dist < NEAR_SPACINGS * spacing || capped)
    }

    fn check_density(&self, mu: &SpaceTimeDensity) -> Result<()> {
        if mu.time() != &self.time || mu.space() != &self.space {
            return invalid("density grid differs from evaluator grid");
        }
        Ok(())
    }

    /// Potential with the given kernel at (t, x), t ∈ [0, T].
    pub fn value(&self, kernel: Kernel, mu: &SpaceTimeDensity, t: f64, x: Vec2) -> Result<Evaluation> {
        self.check_density(mu)?;
        if !(0.0..=self.time.t_final() * (1.0 + 1e-12)).contains(&t) {
            return invalid(format!("time {t} outside [0, T]"));
        }
        let near = self.check(x)?;
        let w = weights_at(&self.cache, Target::Point(x), kernel, &self.time, t.min(self.time.t_final()));
        let value = w.iter().zip(mu.values()).map(|(a, b)| a * b).sum();
        Ok(Evaluation { value, near_boundary: near })
    }

    /// Lag weights at a fixed point, reusable for every density and output time.
    pub fn point_weights(&self, kernel: Kernel, x: Vec2) -> Result<TargetWeights> {
        self.check(x)?;
        Ok(lag_weights(&self.cache, Target::Point(x), kernel, &self.time))
    }

    /// Values at every grid time t_0..t_M at a fixed point.
    pub fn history(&self, kernel: Kernel, mu: &SpaceTimeDensity, x: Vec2) -> Result<Vec<f64>> {
        self.check_density(mu)?;
        Ok(self.point_weights(kernel, x)?.apply(mu.values(), self.space.len()))
    }
}

/// Single layer potential of μ∘φ^{-1} with the pulled-back area element.
pub fn single_layer_eval(phi: &BoundaryMap, mu: &SpaceTimeDensity, t: f64, x: Vec2) -> Result<Evaluation> {
    Evaluator::new(phi, *mu.time(), *mu.space()).value(Kernel::Single, mu, t, x)
}

/// Double layer potential with kernel ∂_{ν(y)} S.
pub fn double_layer_eval(phi: &BoundaryMap, mu: &SpaceTimeDensity, t: f64, x: Vec2) -> Result<Evaluation> {
    Evaluator::new(phi, *mu.time(), *mu.space()).value(Kernel::Double, mu, t, x)
}

/// Spatial gradient of the single layer potential.
pub fn single_layer_gradient(phi: &BoundaryMap, mu: &SpaceTimeDensity, t: f64, x: Vec2) -> Result<Vec2> {
    let ev = Evaluator::new(phi, *mu.time(), *mu.space());
    let gx = ev.value(Kernel::Gradient([1.0, 0.0]), mu, t, x)?.value;
    let gy = ev.value(Kernel::Gradient([0.0, 1.0]), mu, t, x)?.value;
    Ok([gx, gy])
}
