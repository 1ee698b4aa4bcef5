use crate::error::{invalid, Result};
use crate::potentials::SpaceTimeDensity;
use crate::quadrature::diff_matrix;
use crate::Vec2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Values f(t_i, x_p) of a space-time field on a product of time nodes and
/// spatial points. When the points sample a circle at equal angles the
/// field is periodic and tangential derivatives are available.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    times: Vec<f64>,
    points: Vec<Vec2>,
    values: Vec<f64>,
    /// Radius of the sampled circle, for periodic fields.
    circle: Option<f64>,
}

impl SampledField {
    pub fn new(times: Vec<f64>, points: Vec<Vec2>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || points.is_empty() || values.len() != times.len() * points.len() {
            return invalid("sampled field needs times × points values");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("sampled field has non-finite values");
        }
        Ok(Self { times, points, values, circle: None })
    }

    pub fn from_fn(times: Vec<f64>, points: Vec<Vec2>, f: impl Fn(f64, Vec2) -> f64) -> Result<Self> {
        let values = times.iter().flat_map(|&t| points.iter().map(move |&x| (t, x))).map(|(t, x)| f(t, x)).collect();
        Self::new(times, points, values)
    }

    /// A boundary density on the reference circle of the given radius.
    pub fn on_circle(mu: &SpaceTimeDensity, radius: f64) -> Self {
        let points = mu.space().thetas().iter().map(|th| [radius * th.cos(), radius * th.sin()]).collect();
        Self { times: mu.time().nodes(), points, values: mu.values().to_vec(), circle: Some(radius) }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn points(&self) -> &[Vec2] {
        &self.points
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    fn at(&self, i: usize, p: usize) -> f64 {
        self.values[i * self.points.len() + p]
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self { values, ..self.clone() }
    }
}

/// Which node pairs enter the seminorm maxima.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSampling {
    All,
    /// Pairs grouped by index separation; each separation class gets an
    /// equal share of the budget, drawn uniformly with a seeded ChaCha8
    /// generator. Classes smaller than their share are taken whole.
    Stratified { max_pairs: usize, seed: u64 },
}

/// Discrete parabolic Hölder norm of a sampled field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate {
    pub sup_part: f64,
    /// Seminorm in t with exponent `time_exponent`, over same-point pairs.
    pub time_seminorm: f64,
    /// Seminorm in x over same-time pairs: exponent α at order 0, the
    /// discrete Lipschitz constant at order 1.
    pub space_seminorm: f64,
    /// Order 1 only: sup of the tangential derivative and its (α/2; α) seminorms.
    pub gradient: Option<[f64; 3]>,
    pub time_exponent: f64,
    pub space_exponent: f64,
}

impl HolderEstimate {
    pub fn norm(&self) -> f64 {
        let g = self.gradient.map_or(0.0, |g| g[0] + g[1] + g[2]);
        self.sup_part + self.time_seminorm + self.space_seminorm + g
    }
}

/// d^e, with the square root taken exactly.
fn pow(d: f64, e: f64) -> f64 {
    if e == 0.5 {
        d.sqrt()
    } else if e == 1.0 {
        d
    } else {
        d.powf(e)
    }
}

/// Index pairs (a, b), a < b < n, chosen per the sampling rule, grouped by
/// separation b − a.
fn index_pairs(n: usize, sampling: PairSampling, salt: u64) -> Vec<(usize, usize)> {
    match sampling {
        PairSampling::All => (1..n).flat_map(|d| (0..n - d).map(move |a| (a, a + d))).collect(),
        PairSampling::Stratified { max_pairs, seed } => {
            if n < 2 {
                return Vec::new();
            }
            let classes = n - 1;
            let share = (max_pairs / classes).max(1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut out = Vec::new();
            for d in 1..n {
                let count = n - d;
                if count <= share {
                    out.extend((0..count).map(|a| (a, a + d)));
                } else {
                    let mut picked: Vec<usize> = sample(&mut rng, count, share).into_vec();
                    picked.sort_unstable();
                    out.extend(picked.into_iter().map(|a| (a, a + d)));
                }
            }
            out
        }
    }
}

fn seminorms(f: &SampledField, te: f64, se: f64, sampling: PairSampling) -> (f64, f64) {
    let (nt, np) = (f.times.len(), f.points.len());
    let mut time: f64 = 0.0;
    for (a, b) in index_pairs(nt, sampling, 1) {
        let dt = pow((f.times[b] - f.times[a]).abs(), te);
        for p in 0..np {
            time = time.max((f.at(b, p) - f.at(a, p)).abs() / dt);
        }
    }
    let mut space: f64 = 0.0;
    let pairs = index_pairs(np, sampling, 2);
    let dist: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (f.points[a], f.points[b]);
            pow(((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt(), se)
        })
        .collect();
    for i in 0..nt {
        for (&(a, b), d) in pairs.iter().zip(&dist) {
            if *d > 0.0 {
                space = space.max((f.at(i, b) - f.at(i, a)).abs() / d);
            }
        }
    }
    (time, space)
}

/// Parabolic Hölder norm of order 0 (exponents α/2 in t, α in x) or
/// order 1 (exponents (1+α)/2 in t, plus (α/2; α) seminorms of the
/// tangential derivative). Order 1 needs a field sampled on a circle.
/// The estimate is only as good as the grid's resolution of the claimed
/// regularity.
pub fn parabolic_norm(f: &SampledField, alpha: f64, order: u32, sampling: PairSampling) -> Result<HolderEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return invalid("alpha must lie in (0, 1]");
    }
    let sup_part = f.values.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
    match order {
        0 => {
            let (time_seminorm, space_seminorm) = seminorms(f, 0.5 * alpha, alpha, sampling);
            Ok(HolderEstimate { sup_part, time_seminorm, space_seminorm, gradient: None, time_exponent: 0.5 * alpha, space_exponent: alpha })
        }
        1 => {
            let Some(radius) = f.circle else {
                return invalid("order 1 needs a field sampled on a circle");
            };
            let te = 0.5 * (1.0 + alpha);
            let (time_seminorm, space_seminorm) = seminorms(f, te, 1.0, sampling);
            let np = f.points.len();
            let d = diff_matrix(np);
            let mut grad = vec![0.0; f.values.len()];
            for i in 0..f.times.len() {
                let row = &f.values[i * np..(i + 1) * np];
                for j in 0..np {
                    grad[i * np + j] = d[j * np..(j + 1) * np].iter().zip(row).map(|(a, b)| a * b).sum::<f64>() / radius;
                }
            }
            let g = f.with_values(grad);
            let gsup = g.values.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
            let (gt, gs) = seminorms(&g, 0.5 * alpha, alpha, sampling);
            Ok(HolderEstimate {
                sup_part,
                time_seminorm,
                space_seminorm,
                gradient: Some([gsup, gt, gs]),
                time_exponent: te,
                space_exponent: 1.0 + alpha,
            })
        }
        _ => invalid("order must be 0 or 1"),
    }
}
