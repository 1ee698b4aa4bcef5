use super::{Cell, Experiment, ExperimentConfig, Outcome, Plot, Table};
use crate::analysis::{operator_norm_ratios, parabolic_norm, smoothness_report, PairSampling, SampledField, ShapePath};
use crate::error::Result;
use crate::geometry::{extend, extend_radial, BoundaryMap, TubularExtension};
use crate::kernels::{disk_gaussian, gaussian_mass, s2};
use crate::potentials::{assemble, jump_probe_with, ApproachSide, Evaluator, JumpKind, Kernel, OperatorKind, SpaceTimeDensity};
use crate::pullback::{
    b_omega, energy_monitor, layer_fields, test_family, transmission_verify, weak_heat_residual, AnnulusField, AnnulusGrid, LayerKind,
    Shell, TransmissionResiduals, WeakPair,
};
use crate::quadrature::{SpaceGrid, TimeGrid};

const MASS_TOL: f64 = 1e-8;
const MASS_NODES: usize = 400;
const JUMP_TOL: f64 = 0.02;
const DLP_TOL: f64 = 1e-4;
const WEAK_CALORIC_TOL: f64 = 1e-3;
const WEAK_SEPARATION: f64 = 10.0;
const WEAK_NONCALORIC_FLOOR: f64 = 1e-2;
const WEAK_RADIAL_POINTS: usize = 33;
const TRANSMISSION_TOL: f64 = 1e-2;
const ENERGY_TOL: f64 = 0.05;
const ENERGY_CONTROL_FLOOR: f64 = 0.5;
const ENERGY_RADIAL_POINTS: usize = 32;
const SWEEP_STEP: f64 = 1e-2;
const SWEEP_MIN_ORDER: f64 = 1.9;
const SWEEP_TRANSLATION_TOL: f64 = 1e-12;
const NORM_SEEDS: u64 = 20;
const NORM_PAIRS: usize = 4096;

pub(super) fn run(cfg: &ExperimentConfig, shape: Option<&BoundaryMap>) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::KernelCheck => kernel_check(),
        Experiment::JumpTest => jump_test(cfg, shape),
        Experiment::DlpIdentity => dlp_identity(cfg, shape),
        Experiment::PullbackWeak => pullback_weak(cfg, shape),
        Experiment::Transmission => transmission(cfg, shape),
        Experiment::Energy => energy(cfg, shape),
        Experiment::ShapeSweep => shape_sweep(cfg, shape),
        Experiment::Norms => norms(cfg, shape),
    }
}

fn grids(cfg: &ExperimentConfig) -> Result<(TimeGrid, SpaceGrid)> {
    Ok((TimeGrid::new(cfg.t_final, cfg.m)?, SpaceGrid::new(cfg.n)?))
}

/// The smooth test density t (2 + cos θ), bounded away from zero for t > 0.
fn test_density(time: TimeGrid, space: SpaceGrid) -> SpaceTimeDensity {
    SpaceTimeDensity::from_fn(time, space, |t, th| t * (2.0 + th.cos()))
}

fn shape_or(shape: Option<&BoundaryMap>, fallback: impl FnOnce() -> Result<BoundaryMap>) -> Result<BoundaryMap> {
    shape.cloned().map_or_else(fallback, Ok)
}

fn collar(phi: &BoundaryMap, delta: f64) -> Result<TubularExtension> {
    extend(phi, delta).or_else(|_| extend_radial(phi, delta))
}

fn fmax(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

fn kernel_check() -> Result<Outcome> {
    let mut table = Table::new(&["t", "mass", "abs_error"]);
    let mut worst: f64 = 0.0;
    for t in [0.05, 0.5, 1.0] {
        let mass = gaussian_mass(t, MASS_NODES)?;
        let err = (mass - 1.0).abs();
        worst = worst.max(err);
        table.push(vec![t.into(), mass.into(), err.into()]);
    }
    Ok(Outcome { table, plot: None, passed: worst <= MASS_TOL, summary: format!("max |mass - 1| = {worst:.3e} (tol {MASS_TOL:.0e})") })
}

/// Probe indices: four times and four angles spread over the grid.
fn probe_indices(m: usize, n: usize) -> Vec<(usize, usize)> {
    let times = [m / 4, m / 2, (3 * m) / 4, m].map(|i| i.max(1));
    let angles: Vec<usize> = (0..4).map(|k| (k * n / 4 + n / 16 + k) % n).collect();
    times.iter().flat_map(|&i| angles.iter().map(move |&j| (i, j))).collect()
}

fn jump_test(cfg: &ExperimentConfig, shape: Option<&BoundaryMap>) -> Result<Outcome> {
    let phi = shape_or(shape, || BoundaryMap::identity(1.0))?;
    let (time, space) = grids(cfg)?;
    let mu = test_density(time, space);
    let n = cfg.n;
    let ws = assemble(OperatorKind::WStar, &phi, time, space)?.apply(&mu)?;
    let w = assemble(OperatorKind::W, &phi, time, space)?.apply(&mu)?;
    let ev = Evaluator::new(&phi, time, space);
    let mut table = Table::new(&["kind", "side", "theta", "t", "measured_jump", "expected", "rel_error"]);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut errors = Vec::new();
    for (p, (i, j)) in probe_indices(cfg.m, n).into_iter().enumerate() {
        let (t, th) = (time.node(i), space.theta(j));
        let half = 0.5 * mu.at(i, j);
        for (kind, label, op, sign) in [(JumpKind::SingleNormal, "single_normal", &ws, 1.0), (JumpKind::DoubleValue, "double_value", &w, -1.0)] {
            for (side, side_label) in [(ApproachSide::Plus, "plus"), (ApproachSide::Minus, "minus")] {
                // interior limits sit at +½μ for ∂_ν V and −½μ for W
                let expected = sign * -side.sign() * half;
                let row_start = vec![label.into(), side_label.into(), th.into(), t.into()];
                match jump_probe_with(&ev, &mu, kind, side, t, th) {
                    Ok(lim) => {
                        let measured = lim - op[i * n + j];
                        let rel = (measured - expected).abs() / half.abs();
                        worst = worst.max(rel);
                        errors.push((p as f64, rel));
                        table.push([row_start, vec![measured.into(), expected.into(), rel.into()]].concat());
                    }
                    Err(_) => {
                        failures += 1;
                        table.push([row_start, vec![Cell::Missing, expected.into(), Cell::Missing]].concat());
                    }
                }
            }
        }
    }
    let plot = Plot::new("jump relations", "probe", "relative error", true).series("all probes", errors);
    let passed = failures == 0 && worst <= JUMP_TOL;
    Ok(Outcome {
        table,
        plot: Some(plot),
        passed,
        summary: format!("max relative error = {worst:.3e} (tol {JUMP_TOL}), {failures} unconverged ladders"),
    })
}

fn dlp_identity(cfg: &ExperimentConfig, shape: Option<&BoundaryMap>) -> Result<Outcome> {
    // the oracle is the disk heat flow, so the curve is fixed
    debug_assert!(shape.is_none());
    let phi = BoundaryMap::identity(1.0)?;
    let (time, space) = grids(cfg)?;
    let one = SpaceTimeDensity::from_fn(time, space, |_, _| 1.0);
    let ev = Evaluator::new(&phi, time, space);
    let probes: [([f64; 2], &str); 3] = [([0.3, 0.0], "interior"), ([0.0, -0.5], "interior"), ([1.5, 0.2], "exterior")];
    let mut table = Table::new(&["x", "y", "side", "t", "double_layer", "oracle", "abs_error"]);
    let mut worst: f64 = 0.0;
    let mut plot = Plot::new("double layer of one", "t", "absolute error", true);
    for (x, side) in probes {
        let mut pts = Vec::new();
        for frac in [0.25, 0.5, 1.0] {
            let t = frac * cfg.t_final;
            let w = ev.value(Kernel::Double, &one, t, x)?.value;
            let g = disk_gaussian(t, x);
            let oracle = if side == "interior" { g - 1.0 } else { g };
            let err = (w - oracle).abs();
            worst = worst.max(err);
            pts.push((t, err));
            table.push(vec![x[0].into(), x[1].into(), side.into(), t.into(), w.into(), oracle.into(), err.into()]);
        }
        plot = plot.series(&format!("({}, {})", x[0], x[1]), pts);
    }
    Ok(Outcome { table, plot: Some(plot), passed: worst <= DLP_TOL, summary: format!("max error = {worst:.3e} (tol {DLP_TOL:.0e})") })
}

fn pullback_weak(cfg: &ExperimentConfig, shape: Option<&BoundaryMap>) -> Result<Outcome> {
    let shapes: Vec<(String, BoundaryMap)> = match shape {
        Some(s) => vec![("shape_file".into(), s.clone())],
        None => vec![
            ("identity".into(), BoundaryMap::identity(1.0)?),
            ("dilation_1.5".into(), BoundaryMap::dilation(1.5, 1.0)?),
            ("rose_0.3_cos3".into(), BoundaryMap::rose(0.3, 3)?),
        ],
    };
    let time = TimeGrid::new(cfg.t_final, cfg.m)?;
    let fam = test_family();
    let x0 = [2.5, 0.7];
    let mut table = Table::new(&["shape", "shell", "caloric", "noncaloric", "separation"]);
    let mut passed = true;
    let (mut worst_cal, mut least_sep) = (0.0f64, f64::INFINITY);
    for (name, phi) in &shapes {
        let ext = collar(phi, cfg.delta)?;
        for (shell, label) in [(Shell::Plus, "plus"), (Shell::Minus, "minus")] {
            let g = AnnulusGrid::new(time, cfg.n, WEAK_RADIAL_POINTS, ext.delta(), shell)?;
            // a shifted heat kernel is caloric on the whole collar, y₁² is not
            let cal = AnnulusField::from_physical(&ext, g, |t, y| s2(t + 0.1, (y[0] - x0[0]).powi(2) + (y[1] - x0[1]).powi(2)));
            let non = AnnulusField::from_physical(&ext, g, |_, y| y[0] * y[0]);
            let zero = WeakPair::zeros(g, ext.radius());
            let rc = weak_heat_residual(&b_omega(&ext, &cal)?, &zero, &fam)?;
            let rn = weak_heat_residual(&b_omega(&ext, &non)?, &zero, &fam)?;
            let sep = if rc > 0.0 { rn / rc } else { f64::INFINITY };
            passed &= rc <= WEAK_CALORIC_TOL && rn >= WEAK_SEPARATION * rc && rn > WEAK_NONCALORIC_FLOOR;
            worst_cal = worst_cal.max(rc);
            least_sep = least_sep.min(sep);
            table.push(vec![name.clone().into(), label.into(), rc.into(), rn.into(), sep.into()]);
        }
    }
    Ok(Outcome {
        table,
        plot: None,
        passed,
        summary: format!("max caloric residual = {worst_cal:.3e} (tol {WEAK_CALORIC_TOL:.0e}), least separation = {least_sep:.3e}"),
    })
}

fn transmission(cfg: &ExperimentConfig, shape: Option<&BoundaryMap>) -> Result<Outcome> {
    let phi = shape_or(shape, || BoundaryMap::rose(0.3, 3))?;
    let ext = collar(&phi, cfg.delta)?;
    let (time, space) = grids(cfg)?;
    let mu = test_density(time, space);
    let mut table = Table::new(&["kind", "component", "residual", "tolerance", "pass"]);
    let mut worst: f64 = 0.0;
    for (kind, label) in [(LayerKind::Single, "single"), (LayerKind::Double, "double")] {
        let r = transmission_verify(&ext, &mu, kind)?;
        for (name, v) in TransmissionResiduals::LABELS.iter().zip(r.values()) {
            worst = fmax([worst, v]);
            table.push(vec![label.into(), (*name).into(), v.into(), TRANSMISSION_TOL.into(), (v <= TRANSMISSION_TOL).into()]);
        }
        for (name, count) in [("interface_ladder_failures", r.interface_ladder_failures), ("conormal_ladder_failures", r.conormal_ladder_failures)] {
            table.push(vec![label.into(), name.into(), Cell::Int(count as i64), Cell::Missing, Cell::Missing]);
        }
    }
    Ok(Outcome {
        table,
        plot: None,
        passed: worst <= TRANSMISSION_TOL,
        summary: format!("max residual = {worst:.3e} (tol {TRANSMISSION_TOL:.0e})"),
    })
}

fn energy(cfg: &ExperimentConfig, shape: Option<&BoundaryMap>) -> Result<Outcome> {
    let phi = shape_or(shape, || BoundaryMap::rose(0.3, 3))?;
    let ext = collar(&phi, cfg.delta)?;
    let (time, space) = grids(cfg)?;
    let mu = test_density(time, space);
    let ev = Evaluator::new(ext.base(), time, space);
    let (up, um, _) = layer_fields(&ext, &ev, &mu, LayerKind::Single, ENERGY_RADIAL_POINTS)?;
    let report = energy_monitor(&ext, &up, &um)?;
    // negative control: a field with no reason to balance its energy
    let d = ext.delta();
    let f = |_: f64, th: f64, s: f64| (std::f64::consts::PI * s / d).sin() * (2.0 + th.cos());
    let control = energy_monitor(&ext, &AnnulusField::from_chart(up.grid, f), &AnnulusField::from_chart(um.grid, f))?;
    let rel = report.relative_residual();
    let crel = control.relative_residual();
    let mut table =
        Table::new(&["t", "energy", "energy_rate", "dissipation", "boundary", "residual", "relative_residual", "control_relative_residual"]);
    let t_min = 0.1 * cfg.t_final;
    let (mut worst, mut control_least) = (0.0f64, f64::INFINITY);
    for (k, &t) in report.times.iter().enumerate() {
        if t >= t_min - 1e-12 {
            worst = fmax([worst, rel[k]]);
            control_least = control_least.min(crel[k]);
        }
        table.push(vec![
            t.into(),
            report.energy[k].into(),
            report.energy_rate[k].into(),
            report.dissipation[k].into(),
            report.boundary[k].into(),
            report.residual[k].into(),
            rel[k].into(),
            crel[k].into(),
        ]);
    }
    let window = |v: &[f64]| report.times.iter().zip(v).filter(|(t, _)| **t >= t_min - 1e-12).map(|(t, q)| (*t, *q)).collect();
    let plot = Plot::new("energy balance", "t", "relative residual", true)
        .series("single layer", window(&rel))
        .series("negative control", window(&crel));
    Ok(Outcome {
        table,
        plot: Some(plot),
        passed: worst <= ENERGY_TOL && control_least > ENERGY_CONTROL_FLOOR,
        summary: format!("max relative residual = {worst:.3e} (tol {ENERGY_TOL}), least control residual = {control_least:.3e}"),
    })
}

fn shape_sweep(cfg: &ExperimentConfig, shape: Option<&BoundaryMap>) -> Result<Outcome> {
    let (time, space) = grids(cfg)?;
    let mut radial = ShapePath::radial_cosine(0.3, 3)?;
    if let Some(s) = shape {
        radial = ShapePath::new("radial_from_shape_file", s.clone(), radial.direction);
    }
    let translation = ShapePath::translation([0.3, -0.2])?;
    let kinds = [OperatorKind::V, OperatorKind::Vl(0), OperatorKind::WStar, OperatorKind::W];
    let rows = smoothness_report(&[radial.clone(), translation.clone()], &kinds, SWEEP_STEP, time, space)?;
    let mut table = Table::new(&crate::analysis::SMOOTHNESS_HEADER);
    let mut passed = true;
    let mut least_order = f64::INFINITY;
    for r in &rows {
        if r.path == radial.name && r.order == 1 {
            let p = r.observed_order.unwrap_or(f64::NAN);
            least_order = least_order.min(p);
            passed &= p >= SWEEP_MIN_ORDER;
        }
        if r.path == radial.name && r.order == 4 {
            passed &= r.stabilization.is_some_and(|q| (0.5..=2.0).contains(&q));
        }
        if r.path == translation.name {
            passed &= r.norm <= SWEEP_TRANSLATION_TOL;
        }
        table.push(vec![
            r.path.clone().into(),
            r.kind.clone().into(),
            r.order.into(),
            r.norm.into(),
            r.observed_order.into(),
            r.stabilization.into(),
        ]);
    }
    Ok(Outcome { table, plot: None, passed, summary: format!("least first-derivative order = {least_order:.3} (min {SWEEP_MIN_ORDER})") })
}

fn norms(cfg: &ExperimentConfig, shape: Option<&BoundaryMap>) -> Result<Outcome> {
    let mut table = Table::new(&["check", "seed", "value", "refined_value", "quotient"]);
    let times: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
    let f = SampledField::from_fn(times, vec![[0.0, 0.0]], |t, _| t.sqrt())?;
    let sqrt_est = parabolic_norm(&f, 1.0, 0, PairSampling::All)?.time_seminorm;
    let mut passed = (0.99..=1.0).contains(&sqrt_est);
    table.push(vec!["sqrt_t_time_seminorm".into(), Cell::Missing, sqrt_est.into(), Cell::Missing, Cell::Missing]);

    let phi = shape_or(shape, || BoundaryMap::identity(1.0))?;
    let seeds: Vec<u64> = (0..NORM_SEEDS).map(|k| cfg.seed.wrapping_add(k)).collect();
    let sampling = PairSampling::Stratified { max_pairs: NORM_PAIRS, seed: cfg.seed };
    let (time, space) = grids(cfg)?;
    let fine_time = TimeGrid::new(cfg.t_final, 2 * cfg.m)?;
    let fine_space = SpaceGrid::new(2 * cfg.n)?;
    let coarse = operator_norm_ratios(OperatorKind::V, &phi, time, space, cfg.alpha, &seeds, sampling)?;
    let fine = operator_norm_ratios(OperatorKind::V, &phi, fine_time, fine_space, cfg.alpha, &seeds, sampling)?;
    let mut worst: f64 = 1.0;
    let (mut pc, mut pf) = (Vec::new(), Vec::new());
    for ((&s, &a), &b) in seeds.iter().zip(&coarse).zip(&fine) {
        let q = b / a;
        worst = fmax([worst, q, 1.0 / q]);
        passed &= q.is_finite() && (0.5..=2.0).contains(&q);
        pc.push((s as f64, a));
        pf.push((s as f64, b));
        table.push(vec!["operator_norm_ratio".into(), Cell::Int(s as i64), a.into(), b.into(), q.into()]);
    }
    let plot = Plot::new("single layer norm ratios", "seed", "|V mu| / |mu|", false)
        .series(&format!("N={}, M={}", cfg.n, cfg.m), pc)
        .series(&format!("N={}, M={}", 2 * cfg.n, 2 * cfg.m), pf);
    Ok(Outcome {
        table,
        plot: Some(plot),
        passed,
        summary: format!("sqrt(t) seminorm = {sqrt_est:.6}, worst refinement factor = {worst:.3}"),
    })
}
