use super::*;
use crate::geometry::TrigCoeffs;
use crate::kernels::{eval_s, KernelParams};
use proptest::prelude::*;

fn unit_square(n: usize) -> Vec<[f64; 2]> {
    (0..n).flat_map(|i| (0..n).map(move |j| [i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64])).collect()
}

fn uniform_times(m: usize) -> Vec<f64> {
    (0..=m).map(|i| i as f64 / m as f64).collect()
}

#[test]
fn constant_field_has_no_seminorms() {
    let f = SampledField::from_fn(uniform_times(8), unit_square(4), |_, _| -2.5).unwrap();
    let e = parabolic_norm(&f, 0.5, 0, PairSampling::All).unwrap();
    assert_eq!(e.sup_part, 2.5);
    assert_eq!((e.time_seminorm, e.space_seminorm), (0.0, 0.0));
    assert_eq!(e.norm(), 2.5);
}

#[test]
fn square_root_time_seminorm() {
    let f = SampledField::from_fn(uniform_times(64), vec![[0.0, 0.0]], |t, _| t.sqrt()).unwrap();
    let e = parabolic_norm(&f, 1.0, 0, PairSampling::All).unwrap();
    assert!((0.99..=1.0).contains(&e.time_seminorm), "{}", e.time_seminorm);
    assert_eq!(e.time_exponent, 0.5);
}

#[test]
fn linear_field_space_seminorm_matches_brute_force() {
    let pts = unit_square(6);
    let beta = 0.5;
    let f = SampledField::from_fn(vec![0.0, 1.0], pts.clone(), |_, x| x[0]).unwrap();
    // the order-0 space exponent is α, so pass α = β
    let e = parabolic_norm(&f, beta, 0, PairSampling::All).unwrap();
    let mut oracle: f64 = 0.0;
    for a in &pts {
        for b in &pts {
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            if d > 0.0 {
                oracle = oracle.max((a[0] - b[0]).abs() / d.powf(beta));
            }
        }
    }
    assert!((e.space_seminorm - oracle).abs() < 1e-14);
    // attained by pairs aligned with x₁ across the full width
    assert!((oracle - 1.0).abs() < 1e-14);
}

#[test]
fn stratified_sampling_is_seeded_and_bounded_by_all_pairs() {
    let space = crate::quadrature::SpaceGrid::new(64).unwrap();
    let time = crate::quadrature::TimeGrid::new(1.0, 32).unwrap();
    let mu = random_density(time, space, 7);
    let f = SampledField::on_circle(&mu, 1.0);
    let all = parabolic_norm(&f, 0.5, 0, PairSampling::All).unwrap();
    let s = PairSampling::Stratified { max_pairs: 256, seed: 3 };
    let a = parabolic_norm(&f, 0.5, 0, s).unwrap();
    let b = parabolic_norm(&f, 0.5, 0, s).unwrap();
    assert_eq!(a, b);
    assert!(a.time_seminorm <= all.time_seminorm && a.space_seminorm <= all.space_seminorm);
    assert!(a.time_seminorm > 0.5 * all.time_seminorm);
    let c = parabolic_norm(&f, 0.5, 0, PairSampling::Stratified { max_pairs: 256, seed: 4 }).unwrap();
    assert_ne!(a.space_seminorm, c.space_seminorm);
}

#[test]
fn order_one_uses_tangential_derivative() {
    let time = crate::quadrature::TimeGrid::new(1.0, 8).unwrap();
    let space = crate::quadrature::SpaceGrid::new(32).unwrap();
    let mu = SpaceTimeDensity::from_fn(time, space, |t, th| t * th.sin());
    let e = parabolic_norm(&SampledField::on_circle(&mu, 2.0), 0.5, 1, PairSampling::All).unwrap();
    let g = e.gradient.unwrap();
    // d/ds (t sin θ) on a circle of radius 2 is t cos θ / 2
    assert!((g[0] - 0.5).abs() < 1e-12);
    assert_eq!(e.space_exponent, 1.5);
    let plain = SampledField::from_fn(uniform_times(4), unit_square(3), |t, x| t * x[0]).unwrap();
    assert!(parabolic_norm(&plain, 0.5, 1, PairSampling::All).is_err());
    assert!(parabolic_norm(&plain, 0.0, 0, PairSampling::All).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn estimate_is_a_seminorm_plus_sup(
        a in prop::collection::vec(-1.0f64..1.0, 5 * 9),
        b in prop::collection::vec(-1.0f64..1.0, 5 * 9),
        c in -3.0f64..3.0,
    ) {
        let (t, p) = (uniform_times(4), unit_square(3));
        let fa = SampledField::new(t.clone(), p.clone(), a.clone()).unwrap();
        let fb = SampledField::new(t.clone(), p.clone(), b.clone()).unwrap();
        let sum = SampledField::new(t.clone(), p.clone(), a.iter().zip(&b).map(|(x, y)| x + y).collect()).unwrap();
        let scaled = SampledField::new(t, p, a.iter().map(|x| c * x).collect()).unwrap();
        let n = |f: &SampledField| parabolic_norm(f, 0.7, 0, PairSampling::All).unwrap().norm();
        prop_assert!(n(&sum) <= (n(&fa) + n(&fb)) * (1.0 + 1e-14));
        prop_assert!((n(&scaled) - c.abs() * n(&fa)).abs() <= 1e-13 * n(&fa).max(1.0));
    }
}

#[test]
fn superpose_examples() {
    let time = crate::quadrature::TimeGrid::new(1.0, 4).unwrap();
    let space = crate::quadrature::SpaceGrid::new(16).unwrap();
    let id = BoundaryMap::identity(1.0).unwrap();
    let z = superpose(|_, _| 0.0, |_| true, &id, time, space).unwrap();
    assert!(z.values().iter().all(|v| *v == 0.0));

    let dil = BoundaryMap::dilation(2.0, 1.0).unwrap();
    let f = superpose(|t, y| t * y[0], |_| true, &dil, time, space).unwrap();
    for i in 0..=4 {
        for j in 0..16 {
            let want = time.node(i) * 2.0 * space.theta(j).cos();
            assert!((f.at(i, j) - want).abs() < 1e-14);
        }
    }
    assert!(superpose(|t, y| t * y[0], |y| y[0] < 1.5, &dil, time, space).is_err());
    assert!(superpose(|_, _| 1.0, |_| true, &dil, time, space).is_err());
}

#[test]
fn superpose_pair_reproduces_kernel() {
    let time = crate::quadrature::TimeGrid::new(1.0, 4).unwrap();
    let space = crate::quadrature::SpaceGrid::new(8).unwrap();
    let id = BoundaryMap::identity(1.0).unwrap();
    let p = KernelParams::planar();
    let f = |t: f64, y: [f64; 2]| eval_s(&p, t, &y).unwrap();
    let nonzero = |y: [f64; 2]| y != [0.0, 0.0];
    let v = superpose_pair(f, nonzero, &id, time, space).unwrap();
    for k in 0..=4 {
        for i in 0..8 {
            for j in 0..8 {
                let got = v[(k * 8 + i) * 8 + j];
                if i == j {
                    assert_eq!(got, 0.0);
                    continue;
                }
                let (a, b) = (id.point(space.theta(i)), id.point(space.theta(j)));
                let want = eval_s(&p, time.node(k), &[a[0] - b[0], a[1] - b[1]]).unwrap();
                assert_eq!(got, want);
            }
        }
    }
}

#[test]
fn stencils_differentiate_polynomials_exactly() {
    for k in 1..=4u32 {
        let st = stencil(k).unwrap();
        let h: f64 = 0.5;
        // the k-th derivative of s^k at 0 is k!
        let est: f64 = st.iter().map(|&(o, c)| c * (o as f64 * h).powi(k as i32)).sum::<f64>() / h.powi(k as i32);
        let fact: f64 = (1..=k).map(|x| x as f64).product();
        assert!((est - fact).abs() < 1e-12, "k = {k}");
        // and annihilates constants
        assert!(st.iter().map(|&(_, c)| c).sum::<f64>().abs() < 1e-15);
    }
    assert!(stencil(5).is_err());
}

fn small_grid() -> (TimeGrid, SpaceGrid) {
    (TimeGrid::new(1.0, 8).unwrap(), SpaceGrid::new(16).unwrap())
}

#[test]
fn constant_and_translation_paths_have_zero_derivatives() {
    let (time, space) = small_grid();
    let flat = ShapePath::new("flat", BoundaryMap::identity(1.0).unwrap(), TrigCoeffs::zeros(1));
    let tr = ShapePath::translation([0.7, -0.2]).unwrap();
    for kind in [OperatorKind::V, OperatorKind::W, OperatorKind::WStar, OperatorKind::Vl(1)] {
        for order in [1, 4] {
            let d = shape_derivative(kind, &flat, order, 1e-2, time, space).unwrap();
            assert_eq!(d.norm, 0.0);
            assert_eq!(d.observed_order, None);
            let d = shape_derivative(kind, &tr, order, 1e-2, time, space).unwrap();
            assert!(d.norm <= 1e-12, "{kind:?} {order}: {}", d.norm);
        }
    }
}

#[test]
fn first_derivative_is_linear_in_direction() {
    let (time, space) = small_grid();
    let p1 = ShapePath::radial_cosine(0.3, 3).unwrap();
    let p2 = ShapePath::radial_cosine(0.2, 2).unwrap();
    let both = ShapePath::new("sum", p1.base.clone(), p1.direction.axpy(1.0, &p2.direction));
    let d = |p: &ShapePath| shape_derivative(OperatorKind::V, p, 1, 1e-2, time, space).unwrap();
    let (a, b, c) = (d(&p1), d(&p2), d(&both));
    let scale = c.norm;
    let err = c.estimate.iter().zip(a.estimate.iter().zip(&b.estimate)).fold(0.0f64, |m, (x, (y, z))| m.max((x - y - z).abs()));
    assert!(err <= 1e-4 * scale, "{err} vs {scale}");
}

#[test]
fn radial_path_first_derivative_converges_at_second_order() {
    let (time, space) = small_grid();
    let path = ShapePath::radial_cosine(0.3, 3).unwrap();
    let d = shape_derivative(OperatorKind::V, &path, 1, 1e-2, time, space).unwrap();
    let p = d.observed_order.unwrap();
    assert!(p >= 1.9, "observed order {p}");
    assert!(d.norm > 0.0);
}

#[test]
fn smoothness_report_counts_rows() {
    let (time, space) = small_grid();
    assert!(smoothness_report(&[], &[OperatorKind::V], 1e-2, time, space).unwrap().is_empty());
    let paths = [ShapePath::radial_cosine(0.3, 3).unwrap(), ShapePath::translation([1.0, 0.0]).unwrap()];
    let kinds = [OperatorKind::V, OperatorKind::Vl(0), OperatorKind::WStar, OperatorKind::W];
    let rows = smoothness_report(&paths, &kinds, 2e-2, time, space).unwrap();
    assert_eq!(rows.len(), 32);
    for r in rows.iter().filter(|r| r.path == "translation") {
        assert!(r.norm <= 1e-12);
    }
    for r in rows.iter().filter(|r| r.path != "translation" && r.order == 4) {
        let s = r.stabilization.unwrap();
        assert!((0.5..=2.0).contains(&s), "{r:?}");
    }
}

#[test]
fn path_certification_rejects_degenerate_maps() {
    let p = ShapePath::radial_cosine(0.3, 3).unwrap();
    assert!(p.certify(0.5).is_ok());
    assert!(p.certify(5.0).is_err());
}

#[test]
fn operator_norm_ratio_is_resolution_stable() {
    let phi = BoundaryMap::rose(0.3, 3).unwrap();
    let seeds: Vec<u64> = (0..5).collect();
    let s = PairSampling::All;
    let coarse = operator_norm_ratios(OperatorKind::V, &phi, TimeGrid::new(1.0, 8).unwrap(), SpaceGrid::new(16).unwrap(), 0.5, &seeds, s).unwrap();
    let fine = operator_norm_ratios(OperatorKind::V, &phi, TimeGrid::new(1.0, 16).unwrap(), SpaceGrid::new(32).unwrap(), 0.5, &seeds, s).unwrap();
    for (a, b) in coarse.iter().zip(&fine) {
        assert!(a / b <= 2.0 && b / a <= 2.0, "{a} vs {b}");
    }
    assert_eq!(random_density(TimeGrid::new(1.0, 4).unwrap(), SpaceGrid::new(8).unwrap(), 9), random_density(TimeGrid::new(1.0, 4).unwrap(), SpaceGrid::new(8).unwrap(), 9));
}

