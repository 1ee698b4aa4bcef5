use crate::error::{invalid, Error, Result};
use crate::geometry::{BoundaryMap, TrigCoeffs};
use crate::potentials::{assemble, BoundaryOperatorMatrix, OperatorKind};
use crate::quadrature::{SpaceGrid, TimeGrid};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// The straight path s ↦ φ₀ + s ψ in coefficient space.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapePath {
    pub name: String,
    pub base: BoundaryMap,
    pub direction: TrigCoeffs,
}

impl ShapePath {
    pub fn new(name: impl Into<String>, base: BoundaryMap, direction: TrigCoeffs) -> Self {
        Self { name: name.into(), base, direction }
    }

    /// ρ_s = 1 + a s cos kθ on the unit circle: ψ = a cos kθ (cos θ, sin θ).
    pub fn radial_cosine(a: f64, k: usize) -> Result<Self> {
        if k < 2 {
            return invalid("radial path needs k >= 2");
        }
        let mut d = TrigCoeffs::zeros(k + 1);
        // cos kθ cos θ = (cos(k+1)θ + cos(k−1)θ)/2, cos kθ sin θ = (sin(k+1)θ − sin(k−1)θ)/2
        d.cx[k + 1] += 0.5 * a;
        d.cx[k - 1] += 0.5 * a;
        d.sy[k + 1] += 0.5 * a;
        d.sy[k - 1] -= 0.5 * a;
        Ok(Self::new(format!("radial_{a}_cos{k}"), BoundaryMap::identity(1.0)?, d))
    }

    /// Rigid translation of the unit circle by s v.
    pub fn translation(v: [f64; 2]) -> Result<Self> {
        let mut d = TrigCoeffs::zeros(1);
        d.cx[0] = v[0];
        d.cy[0] = v[1];
        Ok(Self::new("translation", BoundaryMap::identity(1.0)?, d))
    }

    /// φ_s, validated as a boundary map.
    pub fn at(&self, s: f64) -> Result<BoundaryMap> {
        BoundaryMap::new(self.base.radius(), self.base.coeffs().axpy(s, &self.direction))
    }

    /// Checks φ_s on 17 equally spaced parameters in [−s_max, s_max].
    pub fn certify(&self, s_max: f64) -> Result<()> {
        for i in 0..=16 {
            let s = s_max * (i as f64 / 8.0 - 1.0);
            self.at(s).map_err(|e| Error::Geometry(format!("path {} fails at s = {s}: {e}", self.name)))?;
        }
        Ok(())
    }
}

/// Central stencil of second-order accuracy for the k-th derivative:
/// (offsets in units of h, coefficients before division by h^k).
pub fn stencil(k: u32) -> Result<&'static [(i32, f64)]> {
    Ok(match k {
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => return invalid("derivative order must be 1..=4"),
    })
}

fn entries(m: &BoundaryOperatorMatrix) -> Vec<f64> {
    m.lag_blocks().iter().chain(m.initial_blocks()).flatten().copied().collect()
}

/// Assembled matrices along a path, cached by parameter.
pub struct PathSampler<'a> {
    path: &'a ShapePath,
    kind: OperatorKind,
    time: TimeGrid,
    space: SpaceGrid,
    cache: BTreeMap<u64, Vec<f64>>,
}

impl<'a> PathSampler<'a> {
    pub fn new(path: &'a ShapePath, kind: OperatorKind, time: TimeGrid, space: SpaceGrid) -> Self {
        Self { path, kind, time, space, cache: BTreeMap::new() }
    }

    /// Assembles every missing parameter of the list in parallel.
    pub fn prefetch(&mut self, params: &[f64]) -> Result<()> {
        let mut todo: Vec<f64> = params.iter().copied().filter(|s| !self.cache.contains_key(&s.to_bits())).collect();
        todo.sort_by(f64::total_cmp);
        todo.dedup();
        let built: Vec<Result<(u64, Vec<f64>)>> = todo
            .par_iter()
            .map(|&s| Ok((s.to_bits(), entries(&assemble(self.kind, &self.path.at(s)?, self.time, self.space)?))))
            .collect();
        for b in built {
            let (k, v) = b?;
            self.cache.insert(k, v);
        }
        Ok(())
    }

    /// The k-th derivative estimate of every matrix entry at s = 0 with step h.
    pub fn derivative(&mut self, k: u32, h: f64) -> Result<Vec<f64>> {
        let st = stencil(k)?;
        let params: Vec<f64> = st.iter().map(|&(o, _)| o as f64 * h).collect();
        self.prefetch(&params)?;
        let scale = h.powi(k as i32);
        // the weights sum to zero, so differencing against one sample keeps
        // the estimate exactly zero wherever all samples agree
        let reference = &self.cache[&params[0].to_bits()];
        let mut out = vec![0.0; reference.len()];
        for (&(_, c), s) in st.iter().zip(&params).skip(1) {
            for ((o, v), r) in out.iter_mut().zip(&self.cache[&s.to_bits()]).zip(reference) {
                *o += c * (v - r);
            }
        }
        out.iter_mut().for_each(|o| *o /= scale);
        Ok(out)
    }
}

/// A shape derivative estimate with its refinement diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDerivative {
    pub kind: OperatorKind,
    pub order: u32,
    pub h: f64,
    /// Entry-wise estimate at step h/2 (lag blocks, then initial blocks).
    pub estimate: Vec<f64>,
    /// max|D_{h/2}|.
    pub norm: f64,
    /// log2(|D_h − D_{h/2}| / |D_{h/2} − D_{h/4}|) in the max norm; None
    /// when the differences vanish or the ratio is not positive and finite.
    pub observed_order: Option<f64>,
    /// max|D_{h/2}| / max|D_h|; None when both vanish.
    pub stabilization: Option<f64>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a: f64, b| a.max(b.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

/// k-th shape derivative of the operator matrix along the path at s = 0,
/// from central differences at steps h, h/2 and h/4.
pub fn shape_derivative(kind: OperatorKind, path: &ShapePath, order: u32, h: f64, time: TimeGrid, space: SpaceGrid) -> Result<ShapeDerivative> {
    let mut sampler = PathSampler::new(path, kind, time, space);
    derivative_with(&mut sampler, order, h)
}

pub(crate) fn derivative_with(sampler: &mut PathSampler, order: u32, h: f64) -> Result<ShapeDerivative> {
    if !(h > 0.0) {
        return invalid("step must be positive");
    }
    sampler.path.certify(2.0 * h)?;
    let d1 = sampler.derivative(order, h)?;
    let d2 = sampler.derivative(order, 0.5 * h)?;
    let d4 = sampler.derivative(order, 0.25 * h)?;
    let (e1, e2) = (max_diff(&d1, &d2), max_diff(&d2, &d4));
    let observed_order = (e1 > 0.0 && e2 > 0.0).then(|| (e1 / e2).log2()).filter(|p| p.is_finite());
    let (n1, n2) = (max_abs(&d1), max_abs(&d2));
    let stabilization = (n1 > 0.0).then(|| n2 / n1);
    Ok(ShapeDerivative { kind: sampler.kind, order, h, norm: n2, estimate: d2, observed_order, stabilization })
}

/// One line of the smoothness table.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessRow {
    pub path: String,
    pub kind: String,
    pub order: u32,
    pub norm: f64,
    pub observed_order: Option<f64>,
    pub stabilization: Option<f64>,
}

pub const SMOOTHNESS_HEADER: [&str; 6] = ["path", "kind", "order", "norm", "observed_order", "stabilization"];

/// Shape derivatives of orders 1..=4 for every (path, kind) pair, one
/// row each, in input order.
pub fn smoothness_report(paths: &[ShapePath], kinds: &[OperatorKind], h: f64, time: TimeGrid, space: SpaceGrid) -> Result<Vec<SmoothnessRow>> {
    let mut rows = Vec::new();
    for path in paths {
        for &kind in kinds {
            let mut sampler = PathSampler::new(path, kind, time, space);
            let all: Vec<f64> = [-2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0].iter().map(|c| c * h).collect();
            sampler.prefetch(&all)?;
            for order in 1..=4 {
                let d = derivative_with(&mut sampler, order, h)?;
                rows.push(SmoothnessRow {
                    path: path.name.clone(),
                    kind: kind.label(),
                    order,
                    norm: d.norm,
                    observed_order: d.observed_order,
                    stabilization: d.stabilization,
                });
            }
        }
    }
    Ok(rows)
}
