//! Exponential integral E1 and its entire companion Ein.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

use std::f64::consts::PI;
use std::sync::OnceLock;

const SERIES_SWITCH: f64 = 1.0;
const UNDERFLOW: f64 = 700.0;

/// E1(z) = ∫_z^∞ e^{-u}/u du for z > 0. Returns +∞ at z = 0 and 0 past the
/// double-precision underflow point.
pub fn e1(z: f64) -> f64 {
    if z.is_nan() || z < 0.0 {
        return f64::NAN;
    }
    if z == 0.0 {
        return f64::INFINITY;
    }
    if z > UNDERFLOW {
        return 0.0;
    }
    if z <= SERIES_SWITCH {
        -EULER_GAMMA - z.ln() + ein(z)
    } else if z <= CHEB_END {
        e1_cheb(z)
    } else {
        e1_cf(z)
    }
}

const CHEB_END: f64 = 8.0;
const CHEB_DEGREE: usize = 28;

/// Chebyshev coefficients of e^z E1(z) on [1, 2], [2, 4] and [4, 8], where
/// the continued fraction converges slowly and loses digits to rounding.
/// Fitted once from e^z E1(z) = ∫_0^∞ e^{−zu}/(1 + u) du.
fn cheb_tables() -> &'static [[f64; CHEB_DEGREE]; 3] {
    static T: OnceLock<[[f64; CHEB_DEGREE]; 3]> = OnceLock::new();
    T.get_or_init(|| {
        let mut out = [[0.0; CHEB_DEGREE]; 3];
        let n = CHEB_DEGREE;
        for (piece, coef) in out.iter_mut().enumerate() {
            let (lo, hi) = (f64::powi(2.0, piece as i32), f64::powi(2.0, piece as i32 + 1));
            let f: Vec<f64> = (0..n)
                .map(|k| {
                    let x = (PI * (k as f64 + 0.5) / n as f64).cos();
                    let z = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
                    scaled_e1_integral(z)
                })
                .collect();
            for (j, c) in coef.iter_mut().enumerate() {
                // reduce j(2k + 1) mod 4n exactly before taking the cosine
                let s: f64 = (0..n).map(|k| f[k] * (PI * ((j * (2 * k + 1)) % (4 * n)) as f64 / (2 * n) as f64).cos()).sum();
                *c = 2.0 * s / n as f64;
            }
            coef[0] *= 0.5;
        }
        out
    })
}

fn scaled_e1_integral(z: f64) -> f64 {
    // the tail past u = 45/z is below e^{-45}
    let f = |u: f64| (-z * u).exp() / (1.0 + u);
    let (lo, hi) = (1.0 / z, 45.0 / z);
    crate::quadrature::gk::integrate(f, 0.0, lo, 1e-18, 1e-16).0 + crate::quadrature::gk::integrate(f, lo, hi, 1e-18, 1e-16).0
}

fn e1_cheb(z: f64) -> f64 {
    let piece = if z <= 2.0 { 0 } else if z <= 4.0 { 1 } else { 2 };
    let lo = f64::powi(2.0, piece as i32);
    let x = (z - lo) / lo * 2.0 - 1.0;
    let c = &cheb_tables()[piece];
    // Clenshaw recurrence
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().rev().take(CHEB_DEGREE - 1) {
        let b = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b;
    }
    (x * b1 - b2 + c[0]) * (-z).exp()
}

/// Ein(z) = ∫_0^z (1 − e^{-u})/u du, so that E1(z) = −γ − ln z + Ein(z).
pub fn ein(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    if z <= SERIES_SWITCH {
        // alternating series; terms fall like z^k/k! so 30 terms are plenty
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..40 {
            term *= -z / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        e1(z) + EULER_GAMMA + z.ln()
    }
}

/// Modified Lentz evaluation of the continued fraction for E1, z > 1.
fn e1_cf(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Simpson on ∫_z^Z e^{-u}/u du with a log substitution u = e^v.
    fn e1_oracle(z: f64) -> f64 {
        let (lo, hi) = (z.ln(), 60f64.ln());
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let f = |v: f64| (-(v.exp())).exp();
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn matches_quadrature_on_both_branches() {
        for &z in &[1e-6, 0.01, 0.3, 0.999, 1.0, 1.001, 2.5, 10.0, 30.0] {
            let want = e1_oracle(z);
            let got = e1(z);
            assert!((got - want).abs() <= 1e-11 * want.abs().max(1e-300), "z={z} got={got} want={want}");
        }
    }

    #[test]
    fn continuous_across_switch() {
        let a = -EULER_GAMMA - 1f64.ln() + ein(1.0);
        let b = e1_cf(1.0);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn interpolated_range_against_tabulated_values() {
        // 30-digit reference values
        let table = [
            (1.001, 0.219_016_422_527_468_855_68),
            (1.051, 0.201_539_864_250_465_350_19),
            (1.5, 0.100_019_582_406_632_651_9),
            (2.0, 0.048_900_510_708_061_119_567),
            (2.75, 0.017_978_938_215_454_406_593),
            (4.0, 0.003_779_352_409_848_906_478_9),
            (5.5, 0.000_640_926_049_865_762_643),
            (7.9, 0.000_042_103_997_131_542_002_669),
            (8.0, 0.000_037_665_622_843_924_901_773),
            (8.5, 0.000_021_621_121_043_483_371_87),
        ];
        for (z, want) in table {
            let got = e1(z);
            assert!((got - want).abs() <= 5e-15 * want, "z = {z}: {got} vs {want}");
        }
    }

    #[test]
    fn interpolated_range_is_smooth_across_pieces() {
        for z in [2.0f64, 4.0, 8.0] {
            let (lo, hi) = (z * (1.0 - 1e-15), z * (1.0 + 1e-15));
            // remove the true change E1'(z) Δz = −e^{−z}/z Δz
            let slope = -(-z).exp() / z * (hi - lo);
            let (a, b) = (e1(lo), e1(hi));
            assert!((b - a - slope).abs() <= 1e-14 * a, "z = {z}");
        }
        for i in 1..=7000 {
            let z = 1.0 + i as f64 * 1e-3;
            let (a, b) = (e1(z), e1_cf(z));
            // the fraction itself carries ~1e-14 rounding near z = 1
            assert!((a - b).abs() <= 5e-14 * b, "z = {z}: {a} vs {b}");
        }
    }

    #[test]
    fn reference_values() {
        // tabulated E1(1) and E1(0.5)
        assert!((e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-15);
        assert!((e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-15);
        assert_eq!(e1(800.0), 0.0);
        assert!(e1(0.0).is_infinite());
    }

    #[test]
    fn ein_small_argument_is_accurate() {
        let z = 1e-9;
        assert!((ein(z) - (z - z * z / 4.0)).abs() < 1e-24);
    }
}
