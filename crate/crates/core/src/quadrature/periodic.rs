//! Rules for smooth 2π-periodic functions sampled at N equispaced nodes
//! (N even): trigonometric interpolation, spectral differentiation and the
//! product rule for the logarithmic kernel log(4 sin²(θ/2)).

use std::f64::consts::{PI, TAU};

/// Weights R_k with ∫_0^{2π} log(4 sin²((θ_j − τ)/2)) f(τ) dτ ≈ Σ_k R_{|j−k|} f(θ_k),
/// exact for trigonometric polynomials of degree < N/2.
pub fn kress_log_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    (0..n)
        .map(|k| {
            let th = TAU * k as f64 / n as f64;
            let mut s = 0.0;
            for m in 1..half {
                s += (m as f64 * th).cos() / m as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            -(4.0 * PI / n as f64) * s - (4.0 * PI / (n * n) as f64) * sign
        })
        .collect()
}

/// Row-major N×N spectral differentiation matrix for periodic samples.
pub fn diff_matrix(n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n * n];
    let h = TAU / n as f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let k = i as isize - j as isize;
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                d[i * n + j] = 0.5 * sign / (0.5 * k as f64 * h).tan();
            }
        }
    }
    d
}

/// Spectral derivative of periodic samples.
pub fn fourier_derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let d = diff_matrix(n);
    (0..n).map(|i| (0..n).map(|j| d[i * n + j] * values[j]).sum()).collect()
}

/// Value at θ of the trigonometric interpolant of equispaced samples.
pub fn trig_interpolate(values: &[f64], theta: f64) -> f64 {
    let n = values.len();
    let h = TAU / n as f64;
    let mut acc = 0.0;
    for (m, v) in values.iter().enumerate() {
        let d = theta - m as f64 * h;
        let half = 0.5 * d;
        let s = half.sin();
        if s.abs() < 1e-14 {
            return *v;
        }
        acc += v * (0.5 * n as f64 * d).sin() * half.cos() / s / n as f64;
    }
    acc
}

/// Cardinal functions of the N-point interpolant sampled on a grid that is
/// `p` times finer, stored compactly through a cotangent table.
#[derive(Debug, Clone)]
pub struct CardinalTable {
    n: usize,
    p: usize,
    cot: Vec<f64>,
    sin: Vec<f64>,
}

impl CardinalTable {
    pub fn new(n: usize, p: usize) -> Self {
        let nf = n * p;
        let cot = (0..nf)
            .map(|k| if k == 0 { 0.0 } else { 1.0 / (PI * k as f64 / nf as f64).tan() })
            .collect();
        let sin = (0..p).map(|f| (PI * f as f64 / p as f64).sin()).collect();
        Self { n, p, cot, sin }
    }

    pub fn fine_len(&self) -> usize {
        self.n * self.p
    }

    /// L_m(θ_f) for coarse node m and fine node f.
    pub fn value(&self, m: usize, f: usize) -> f64 {
        let r = f % self.p;
        if r == 0 {
            return if f / self.p == m { 1.0 } else { 0.0 };
        }
        let nf = self.fine_len();
        let sign = if (m + f / self.p).is_multiple_of(2) { 1.0 } else { -1.0 };
        let k = (f + nf - self.p * m) % nf;
        sign * self.sin[r] * self.cot[k] / self.n as f64
    }

    /// Coarse weights W_m = Σ_f w_f L_m(θ_f), so that Σ_f w_f u(θ_f) equals
    /// Σ_m W_m u_m for the interpolant u of coarse samples u_m.
    pub fn project(&self, fine: &[f64]) -> Vec<f64> {
        let (n, p) = (self.n, self.p);
        let nf = n * p;
        assert_eq!(fine.len(), nf);
        let mut out = vec![0.0; n];
        for (f, &w) in fine.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let r = f % p;
            if r == 0 {
                out[f / p] += w;
                continue;
            }
            // sin(π f / p) = (−1)^{f/p} sin(π r / p)
            let base = if (f / p) % 2 == 0 { w * self.sin[r] } else { -w * self.sin[r] } / n as f64;
            let mut k = f;
            for (m, o) in out.iter_mut().enumerate() {
                let c = self.cot[k];
                *o += if m % 2 == 0 { base * c } else { -base * c };
                k = if k >= p { k - p } else { k + nf - p };
            }
        }
        out
    }
}
