use crate::error::{invalid, Result};
use crate::quadrature::{SpaceGrid, TimeGrid};

/// Samples μ(t_i, θ_j) on a time × angle grid, stored row by row in time.
///
/// Densities with μ(0, ·) ≠ 0 are accepted (they make useful oracles) but
/// [`SpaceTimeDensity::is_c0`] reports that they lie outside the spaces of
/// functions vanishing at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeDensity {
    time: TimeGrid,
    space: SpaceGrid,
    values: Vec<f64>,
}

impl SpaceTimeDensity {
    pub fn new(time: TimeGrid, space: SpaceGrid, values: Vec<f64>) -> Result<Self> {
        let want = (time.steps() + 1) * space.len();
        if values.len() != want {
            return invalid(format!("density has {} samples, grid needs {want}", values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("density has non-finite samples");
        }
        Ok(Self { time, space, values })
    }

    pub fn zeros(time: TimeGrid, space: SpaceGrid) -> Self {
        let n = (time.steps() + 1) * space.len();
        Self { time, space, values: vec![0.0; n] }
    }

    pub fn from_fn(time: TimeGrid, space: SpaceGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity((time.steps() + 1) * space.len());
        for i in 0..=time.steps() {
            for j in 0..space.len() {
                values.push(f(time.node(i), space.theta(j)));
            }
        }
        Self { time, space, values }
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }
    pub fn space(&self) -> &SpaceGrid {
        &self.space
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.space.len();
        &self.values[i * n..(i + 1) * n]
    }
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.space.len() + j]
    }

    /// True when μ(t_0, ·) = 0.
    pub fn is_c0(&self) -> bool {
        self.row(0).iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| c * v).collect(), ..self.clone() }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.time != other.time || self.space != other.space {
            return invalid("densities live on different grids");
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { values, ..self.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_flags() {
        let t = TimeGrid::new(1.0, 4).unwrap();
        let s = SpaceGrid::new(8).unwrap();
        assert!(SpaceTimeDensity::new(t, s, vec![0.0; 3]).is_err());
        let mu = SpaceTimeDensity::from_fn(t, s, |t, th| t * (2.0 + th.cos()));
        assert!(mu.is_c0());
        assert_eq!(mu.at(4, 0), 3.0);
        let one = SpaceTimeDensity::from_fn(t, s, |_, _| 1.0);
        assert!(!one.is_c0());
        let sum = mu.plus(&one).unwrap();
        assert_eq!(sum.at(2, 0), mu.at(2, 0) + 1.0);
        assert_eq!(mu.scaled(2.0).max_abs(), 6.0);
    }
}
