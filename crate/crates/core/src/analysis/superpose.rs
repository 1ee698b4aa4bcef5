use crate::error::{invalid, Error, Result};
use crate::geometry::BoundaryMap;
use crate::potentials::SpaceTimeDensity;
use crate::quadrature::{SpaceGrid, TimeGrid};
use crate::Vec2;

/// Samples of F(t, φ(θ_j)) on the density grid, i.e. the superposition
/// T_F applied to φ^T. F must vanish at t = 0 and φ must map into the
/// domain of F.
pub fn superpose(
    f: impl Fn(f64, Vec2) -> f64,
    domain: impl Fn(Vec2) -> bool,
    phi: &BoundaryMap,
    time: TimeGrid,
    space: SpaceGrid,
) -> Result<SpaceTimeDensity> {
    for th in space.thetas() {
        if !domain(phi.point(th)) {
            return Err(Error::InvalidInput(format!("φ({th}) leaves the domain of F")));
        }
    }
    let out = SpaceTimeDensity::from_fn(time, space, |t, th| f(t, phi.point(th)));
    if out.row(0).iter().any(|v| *v != 0.0) {
        return invalid("F does not vanish at t = 0");
    }
    if out.values().iter().any(|v| !v.is_finite()) {
        return invalid("F is not finite on the image of φ");
    }
    Ok(out)
}

/// Samples of F(t, φ(θ_i) − φ(θ_j)) for the two-point map, stored
/// (M+1) × N × N. Diagonal pairs are outside the map's range and are set
/// to zero.
pub fn superpose_pair(
    f: impl Fn(f64, Vec2) -> f64,
    domain: impl Fn(Vec2) -> bool,
    phi: &BoundaryMap,
    time: TimeGrid,
    space: SpaceGrid,
) -> Result<Vec<f64>> {
    let n = space.len();
    let pts: Vec<Vec2> = space.thetas().iter().map(|&th| phi.point(th)).collect();
    let diff = |i: usize, j: usize| [pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]];
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            if !domain(diff(i, j)) {
                return Err(Error::InvalidInput(format!("pair ({i}, {j}) leaves the domain of F")));
            }
        }
    }
    let mut out = vec![0.0; (time.steps() + 1) * n * n];
    for (k, t) in time.nodes().into_iter().enumerate() {
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let v = f(t, diff(i, j));
                if k == 0 && v != 0.0 {
                    return invalid("F does not vanish at t = 0");
                }
                out[(k * n + i) * n + j] = v;
            }
        }
    }
    Ok(out)
}
