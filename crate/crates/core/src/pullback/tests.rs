use super::*;
use crate::geometry::{extend, extend_radial, BoundaryMap, TubularExtension};
use crate::kernels::s2;
use crate::potentials::tests::volume_gaussian;
use crate::potentials::{single_layer_eval, Evaluator, SpaceTimeDensity};
use crate::quadrature::{SpaceGrid, TimeGrid};

fn grid(ext: &TubularExtension, m: usize, n: usize, k: usize, shell: Shell) -> AnnulusGrid {
    AnnulusGrid::new(TimeGrid::new(1.0, m).unwrap(), n, k, ext.delta(), shell).unwrap()
}

fn density(n: usize, m: usize) -> SpaceTimeDensity {
    SpaceTimeDensity::from_fn(TimeGrid::new(1.0, m).unwrap(), SpaceGrid::new(n).unwrap(), |t, th| t * (2.0 + th.cos()))
}

fn rose_ext(delta: f64) -> TubularExtension {
    let phi = BoundaryMap::rose(0.3, 3).unwrap();
    extend(&phi, delta).or_else(|_| extend_radial(&phi, delta)).unwrap()
}

#[test]
fn b_omega_of_zero_is_zero() {
    let ext = extend(&BoundaryMap::identity(1.0).unwrap(), 0.2).unwrap();
    let g = grid(&ext, 4, 16, 5, Shell::Plus);
    let p = b_omega(&ext, &AnnulusField::zeros(g)).unwrap();
    assert!(p.w0.iter().all(|v| *v == 0.0));
    assert!(p.w1.iter().all(|v| *v == [0.0, 0.0]));
}

#[test]
fn b_omega_identity_linear_field() {
    let ext = extend(&BoundaryMap::identity(1.0).unwrap(), 0.2).unwrap();
    for shell in [Shell::Plus, Shell::Minus] {
        let g = grid(&ext, 3, 16, 5, shell);
        let u = AnnulusField::from_physical(&ext, g, |_, y| y[0]);
        let p = b_omega(&ext, &u).unwrap();
        for (idx, (w0, w1)) in p.w0.iter().zip(&p.w1).enumerate() {
            assert!((w0 + u.values[idx]).abs() < 1e-12);
            assert!((w1[0] - 1.0).abs() < 1e-10 && w1[1].abs() < 1e-10, "{w1:?}");
        }
    }
}

#[test]
fn b_omega_dilation_constant_field() {
    // the normal-offset extension of a dilated circle is Φ(x) = (λ + s) x/|x|,
    // so det DΦ = (λ + s)/(1 + s); it equals λ² only for the linear dilation
    let lambda = 1.5;
    let ext = extend(&BoundaryMap::dilation(lambda, 1.0).unwrap(), 0.2).unwrap();
    let g = grid(&ext, 2, 16, 5, Shell::Minus);
    let p = b_omega(&ext, &AnnulusField::from_chart(g, |_, _, _| 1.0)).unwrap();
    for k in 0..g.n_s {
        let s = g.s(k);
        let det = (lambda + s) / (1.0 + s);
        let idx = g.index(1, 3, k);
        assert!((p.w0[idx] + det).abs() < 1e-12);
        assert!(p.w1[idx][0].abs() < 1e-12 && p.w1[idx][1].abs() < 1e-12);
    }
}

#[test]
fn weak_residual_of_identical_pairs_is_zero() {
    let ext = rose_ext(0.2);
    let g = grid(&ext, 8, 16, 5, Shell::Plus);
    let u = AnnulusField::from_physical(&ext, g, |t, y| t * y[0] * y[1]);
    let p = b_omega(&ext, &u).unwrap();
    assert_eq!(weak_heat_residual(&p, &p, &test_family()).unwrap(), 0.0);
    assert_eq!(test_family().len(), 10);
}

fn weak_pair_residuals(ext: &TubularExtension, shell: Shell) -> (f64, f64) {
    let g = grid(ext, 64, 64, 33, shell);
    let x0 = [2.5, 0.7];
    let cal = AnnulusField::from_physical(ext, g, |t, y| s2(t + 0.1, (y[0] - x0[0]).powi(2) + (y[1] - x0[1]).powi(2)));
    let non = AnnulusField::from_physical(ext, g, |_, y| y[0] * y[0]);
    let zero = WeakPair::zeros(g, ext.radius());
    let fam = test_family();
    let r1 = weak_heat_residual(&b_omega(ext, &cal).unwrap(), &zero, &fam).unwrap();
    let r2 = weak_heat_residual(&b_omega(ext, &non).unwrap(), &zero, &fam).unwrap();
    (r1, r2)
}

#[test]
fn weak_residual_separates_caloric_from_non_caloric() {
    let shapes = [
        BoundaryMap::identity(1.0).unwrap(),
        BoundaryMap::dilation(1.5, 1.0).unwrap(),
        BoundaryMap::rose(0.3, 3).unwrap(),
    ];
    for phi in &shapes {
        let ext = extend(phi, 0.2).or_else(|_| extend_radial(phi, 0.2)).unwrap();
        for shell in [Shell::Plus, Shell::Minus] {
            let (cal, non) = weak_pair_residuals(&ext, shell);
            assert!(cal <= 1e-3, "caloric residual {cal}");
            assert!(non >= 10.0 * cal && non > 1e-2, "caloric {cal}, non-caloric {non}");
        }
    }
}

#[test]
fn shell_operator_of_zero_is_zero() {
    let ext = extend(&BoundaryMap::identity(1.0).unwrap(), 0.3).unwrap();
    let mu = SpaceTimeDensity::zeros(TimeGrid::new(1.0, 4).unwrap(), SpaceGrid::new(16).unwrap());
    let s = shell_operator(ShellKind::VShell, &ext, &mu, Shell::Plus).unwrap();
    assert!(s.values.iter().all(|v| *v == 0.0));
}

#[test]
fn v_shell_matches_single_layer_eval() {
    let ext = rose_ext(0.3);
    let mu = density(32, 8);
    for shell in [Shell::Plus, Shell::Minus] {
        let s = shell_operator(ShellKind::VShell, &ext, &mu, shell).unwrap();
        for (i, j) in [(3, 0), (8, 5), (5, 17)] {
            let x = ext.point(mu.space().theta(j), shell.sign() * ext.delta());
            let v = single_layer_eval(ext.base(), &mu, mu.time().node(i), x).unwrap().value;
            assert!((v - s.at(i, j)).abs() <= 1e-10 * v.abs().max(1.0));
        }
    }
}

#[test]
fn w_shell_of_one_matches_volume_gaussian() {
    let ext = extend(&BoundaryMap::identity(1.0).unwrap(), 0.3).unwrap();
    let time = TimeGrid::new(1.0, 16).unwrap();
    let mu = SpaceTimeDensity::from_fn(time, SpaceGrid::new(64).unwrap(), |_, _| 1.0);
    for shell in [Shell::Plus, Shell::Minus] {
        let s = shell_operator(ShellKind::WShell, &ext, &mu, shell).unwrap();
        for (i, j) in [(4, 0), (10, 9), (16, 40)] {
            let x = ext.point(mu.space().theta(j), shell.sign() * 0.3);
            let g = volume_gaussian(time.node(i), x);
            let want = if shell == Shell::Plus { g - 1.0 } else { g };
            assert!((s.at(i, j) - want).abs() <= 1e-4, "{shell:?} {i} {j}: {} vs {want}", s.at(i, j));
        }
    }
}

#[test]
fn transmission_of_zero_density_is_exactly_zero() {
    let ext = rose_ext(0.3);
    let mu = SpaceTimeDensity::zeros(TimeGrid::new(1.0, 4).unwrap(), SpaceGrid::new(16).unwrap());
    for kind in [LayerKind::Single, LayerKind::Double] {
        let r = transmission_verify(&ext, &mu, kind).unwrap();
        assert_eq!(r, TransmissionResiduals::default());
    }
}

#[test]
fn transmission_on_the_circle() {
    let ext = extend(&BoundaryMap::identity(1.0).unwrap(), 0.3).unwrap();
    let mu = density(64, 32);
    let s = transmission_verify(&ext, &mu, LayerKind::Single).unwrap();
    assert!(s.max() <= 1e-2, "{s:?}");
    let d = transmission_verify(&ext, &mu, LayerKind::Double).unwrap();
    assert!(d.max() <= 2e-2, "{d:?}");
}

#[test]
fn interface_residual_is_subadditive() {
    let ext = rose_ext(0.3);
    let (time, space) = (TimeGrid::new(1.0, 8).unwrap(), SpaceGrid::new(32).unwrap());
    let m1 = SpaceTimeDensity::from_fn(time, space, |t, th| t * (2.0 + th.cos()));
    let m2 = SpaceTimeDensity::from_fn(time, space, |t, th| t * t * (3.0 * th).sin());
    let ev = Evaluator::new(ext.base(), time, space);
    let jump = |mu: &SpaceTimeDensity| {
        let (up, um, _) = layer_fields(&ext, &ev, mu, LayerKind::Double, 3).unwrap();
        let mut r: f64 = 0.0;
        for i in 0..=8 {
            for j in 0..32 {
                r = r.max((up.at(i, j, 0) - um.at(i, j, 0) + mu.at(i, j)).abs());
            }
        }
        r
    };
    let sum = m1.plus(&m2).unwrap();
    assert!(jump(&sum) <= jump(&m1) + jump(&m2) + 1e-12);
}

fn single_layer_pair(ext: &TubularExtension, mu: &SpaceTimeDensity, n_s: usize) -> (AnnulusField, AnnulusField) {
    let ev = Evaluator::new(ext.base(), *mu.time(), *mu.space());
    let (p, m, _) = layer_fields(ext, &ev, mu, LayerKind::Single, n_s).unwrap();
    (p, m)
}

#[test]
fn energy_of_zero_is_zero() {
    let ext = extend(&BoundaryMap::identity(1.0).unwrap(), 0.3).unwrap();
    let g = grid(&ext, 8, 16, 5, Shell::Plus);
    let r = energy_monitor(&ext, &AnnulusField::zeros(g), &AnnulusField::zeros(g.mirrored())).unwrap();
    for v in [&r.energy, &r.energy_rate, &r.dissipation, &r.boundary, &r.residual] {
        assert!(v.iter().all(|x| *x == 0.0));
    }
}

#[test]
fn energy_identity_holds_for_single_layer() {
    let ext = extend(&BoundaryMap::identity(1.0).unwrap(), 0.3).unwrap();
    let mu = density(64, 32);
    let (p, m) = single_layer_pair(&ext, &mu, 17);
    let r = energy_monitor(&ext, &p, &m).unwrap();
    let rel = r.relative_residual();
    for (t, q) in r.times.iter().zip(&rel) {
        if *t >= 0.1 {
            assert!(*q <= 0.05, "t = {t}: {q}");
        }
    }
    // the difference of equal potentials has no energy
    let z = energy_monitor(&ext, &p.minus(&p).unwrap(), &m.minus(&m).unwrap()).unwrap();
    assert!(z.energy.iter().all(|e| *e == 0.0));
}

#[test]
fn energy_negative_control_fails_identity() {
    let ext = rose_ext(0.3);
    let g = grid(&ext, 16, 64, 17, Shell::Plus);
    let d = ext.delta();
    let f = |_: f64, th: f64, s: f64| (std::f64::consts::PI * s / d).sin() * (2.0 + th.cos());
    let r = energy_monitor(&ext, &AnnulusField::from_chart(g, f), &AnnulusField::from_chart(g.mirrored(), f)).unwrap();
    assert!(r.relative_residual().iter().all(|q| *q > 0.5));
}

