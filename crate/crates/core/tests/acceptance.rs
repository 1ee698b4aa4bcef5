//! Acceptance checks at fixed grids and tolerances. Runs as a
//! plain binary so each criterion prints one PASS/FAIL line; a name filter
//! on the command line selects a subset.

use heatlayer::analysis::{operator_norm_ratios, parabolic_norm, smoothness_report, PairSampling, SampledField, ShapePath};
use heatlayer::geometry::{extend, extend_radial, BoundaryMap, TubularExtension};
use heatlayer::kernels::{gaussian_mass, s2};
use heatlayer::potentials::{
    assemble, assemble_direct, jump_probe_with, ApproachSide, Evaluator, JumpKind, Kernel, OperatorKind, SpaceTimeDensity,
};
use heatlayer::pullback::{
    b_omega, energy_monitor, layer_fields, test_family, transmission_verify, weak_heat_residual, AnnulusField, AnnulusGrid, LayerKind,
    Shell, WeakPair,
};
use heatlayer::quadrature::{SpaceGrid, TimeGrid};
use std::f64::consts::{PI, TAU};
use std::process::Command;
use std::time::Instant;

type Outcome = Result<(bool, String), String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn grids(n: usize, m: usize) -> (TimeGrid, SpaceGrid) {
    (TimeGrid::new(1.0, m).unwrap(), SpaceGrid::new(n).unwrap())
}

fn test_density(n: usize, m: usize) -> SpaceTimeDensity {
    let (t, s) = grids(n, m);
    SpaceTimeDensity::from_fn(t, s, |t, th| t * (2.0 + th.cos()))
}

fn rose() -> BoundaryMap {
    BoundaryMap::rose(0.3, 3).unwrap()
}

fn collar(phi: &BoundaryMap, delta: f64) -> Result<TubularExtension, String> {
    extend(phi, delta).or_else(|_| extend_radial(phi, delta)).map_err(err)
}

/// Composite Simpson rule with an even number of panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// ∫_{|y|<1} S(t, x − y) dy in polar coordinates about the disk centre:
/// periodic trapezoid in the angle, Simpson in the radius.
fn disk_heat_oracle(t: f64, x: [f64; 2]) -> f64 {
    let na = 256;
    let ring = |r: f64| {
        let s: f64 = (0..na)
            .map(|k| {
                let a = TAU * k as f64 / na as f64;
                let d2 = (x[0] - r * a.cos()).powi(2) + (x[1] - r * a.sin()).powi(2);
                (-d2 / (4.0 * t)).exp() / (4.0 * PI * t)
            })
            .sum();
        r * s * TAU / na as f64
    };
    simpson(ring, 0.0, 1.0, 2000)
}

fn c1_gaussian_mass() -> Outcome {
    let nodes = 400;
    let mut worst: f64 = 0.0;
    for t in [0.05, 0.5, 1.0] {
        // tensor trapezoid on [−L, L]² written out here, then the library value
        let l = 10.0 * f64::sqrt(t);
        let h = 2.0 * l / (nodes - 1) as f64;
        let w = |k: usize| if k == 0 || k == nodes - 1 { 0.5 } else { 1.0 };
        let mut own = 0.0;
        for i in 0..nodes {
            let x = -l + i as f64 * h;
            for j in 0..nodes {
                let y = -l + j as f64 * h;
                own += w(i) * w(j) * (-(x * x + y * y) / (4.0 * t)).exp() / (4.0 * PI * t);
            }
        }
        own *= h * h;
        let lib = gaussian_mass(t, nodes).map_err(err)?;
        worst = worst.max((own - 1.0).abs()).max((lib - 1.0).abs());
        if (lib - own).abs() > 1e-12 {
            return Ok((false, format!("t = {t}: library {lib} vs inline {own}")));
        }
    }
    Ok((worst <= 1e-8, format!("max |mass - 1| = {worst:.2e}")))
}

fn c2_double_layer_of_one() -> Outcome {
    let (time, space) = grids(256, 256);
    let phi = BoundaryMap::identity(1.0).map_err(err)?;
    let one = SpaceTimeDensity::from_fn(time, space, |_, _| 1.0);
    let ev = Evaluator::new(&phi, time, space);
    let mut worst: f64 = 0.0;
    for (x, inside) in [([0.3, 0.0], true), ([0.0, -0.5], true), ([0.0, 1.6], false)] {
        for t in [0.25, 0.5, 1.0] {
            let w = ev.value(Kernel::Double, &one, t, x).map_err(err)?.value;
            let g = disk_heat_oracle(t, x);
            let want = if inside { g - 1.0 } else { g };
            worst = worst.max((w - want).abs());
        }
    }
    Ok((worst <= 1e-4, format!("max |w[1] - oracle| = {worst:.2e}")))
}

fn c3_jump_relations() -> Outcome {
    let (n, m) = (128, 128);
    let mu = test_density(n, m);
    let (time, space) = (*mu.time(), *mu.space());
    let mut worst: f64 = 0.0;
    for phi in [BoundaryMap::identity(1.0).map_err(err)?, rose()] {
        let ws = assemble(OperatorKind::WStar, &phi, time, space).map_err(err)?.apply(&mu).map_err(err)?;
        let w = assemble(OperatorKind::W, &phi, time, space).map_err(err)?.apply(&mu).map_err(err)?;
        let ev = Evaluator::new(&phi, time, space);
        for i in [16, 48, 80, 128] {
            for j in [0, 21, 64, 107] {
                let (t, th) = (time.node(i), space.theta(j));
                let half = 0.5 * t * (2.0 + th.cos());
                for side in [ApproachSide::Plus, ApproachSide::Minus] {
                    // interior: ∂_ν V − W* → +½μ and W − W → −½μ; exterior flips both
                    let s = if side == ApproachSide::Plus { 1.0 } else { -1.0 };
                    let dn = jump_probe_with(&ev, &mu, JumpKind::SingleNormal, side, t, th).map_err(err)?;
                    let dv = jump_probe_with(&ev, &mu, JumpKind::DoubleValue, side, t, th).map_err(err)?;
                    worst = worst.max(((dn - ws[i * n + j]) - s * half).abs() / half);
                    worst = worst.max(((dv - w[i * n + j]) + s * half).abs() / half);
                }
            }
        }
    }
    Ok((worst <= 0.02, format!("max relative error = {worst:.2e} over 16 probes on 2 curves")))
}

fn c4_caloricity() -> Outcome {
    let mu = test_density(64, 64);
    let phi = rose();
    let ev = Evaluator::new(&phi, *mu.time(), *mu.space());
    let u = |t: f64, x: [f64; 2]| ev.value(Kernel::Single, &mu, t, x).map(|e| e.value).map_err(err);
    let probes = [[0.0, 0.0], [2.2, 0.5], [-2.0, 0.3], [0.2, -2.1], [1.8, 1.8]];
    let poly = phi.polygon(4096);
    for x in probes {
        let d = poly.iter().map(|p| (p[0] - x[0]).hypot(p[1] - x[1])).fold(f64::INFINITY, f64::min);
        if d < 0.5 {
            return Err(format!("probe {x:?} is {d:.3} from the curve"));
        }
    }
    let (t, h, k) = (0.6, 1e-3, 1e-3);
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for x in probes {
        let c = u(t, x)?;
        let ut = (u(t + k, x)? - u(t - k, x)?) / (2.0 * k);
        let lap = (u(t, [x[0] + h, x[1]])? + u(t, [x[0] - h, x[1]])? + u(t, [x[0], x[1] + h])? + u(t, [x[0], x[1] - h])? - 4.0 * c) / (h * h);
        worst = worst.max((ut - lap).abs());
        scale = scale.max(c.abs());
    }
    Ok((worst <= 1e-3 * scale, format!("max |u_t - lap u| / max|u| = {:.2e}", worst / scale)))
}

fn c5_pullback_weak() -> Outcome {
    let shapes = [
        ("identity", BoundaryMap::identity(1.0).map_err(err)?),
        ("dilation", BoundaryMap::dilation(1.5, 1.0).map_err(err)?),
        ("rose", rose()),
    ];
    let fam = test_family();
    let x0 = [2.5, 0.7];
    let (mut worst, mut least_sep, mut ok) = (0.0f64, f64::INFINITY, true);
    for (_, phi) in &shapes {
        let ext = collar(phi, 0.2)?;
        for shell in [Shell::Plus, Shell::Minus] {
            let g = AnnulusGrid::new(TimeGrid::new(1.0, 64).unwrap(), 64, 33, ext.delta(), shell).map_err(err)?;
            let cal = AnnulusField::from_physical(&ext, g, |t, y| s2(t + 0.1, (y[0] - x0[0]).powi(2) + (y[1] - x0[1]).powi(2)));
            let non = AnnulusField::from_physical(&ext, g, |_, y| y[0] * y[0]);
            let zero = WeakPair::zeros(g, ext.radius());
            let rc = weak_heat_residual(&b_omega(&ext, &cal).map_err(err)?, &zero, &fam).map_err(err)?;
            let rn = weak_heat_residual(&b_omega(&ext, &non).map_err(err)?, &zero, &fam).map_err(err)?;
            ok &= rc <= 1e-3 && rn >= 10.0 * rc;
            worst = worst.max(rc);
            least_sep = least_sep.min(rn / rc);
        }
    }
    Ok((ok, format!("max caloric residual = {worst:.2e}, least separation = {least_sep:.1}x")))
}

fn c6_transmission() -> Outcome {
    let ext = collar(&rose(), 0.3)?;
    let mu = test_density(128, 64);
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for (kind, label) in [(LayerKind::Single, "single"), (LayerKind::Double, "double")] {
        let r = transmission_verify(&ext, &mu, kind).map_err(err)?;
        worst = worst.max(r.max());
        parts.push(format!("{label} {:.2e}", r.max()));
    }
    Ok((worst <= 1e-2, format!("max residual: {}", parts.join(", "))))
}

fn c7_energy() -> Outcome {
    let ext = collar(&rose(), 0.3)?;
    let mu = test_density(128, 64);
    let ev = Evaluator::new(ext.base(), *mu.time(), *mu.space());
    let (up, um, _) = layer_fields(&ext, &ev, &mu, LayerKind::Single, 32).map_err(err)?;
    let r = energy_monitor(&ext, &up, &um).map_err(err)?;
    let d = ext.delta();
    let f = |_: f64, th: f64, s: f64| (PI * s / d).sin() * (2.0 + th.cos());
    let c = energy_monitor(&ext, &AnnulusField::from_chart(up.grid, f), &AnnulusField::from_chart(um.grid, f)).map_err(err)?;
    let window = |v: Vec<f64>| r.times.iter().zip(v).filter(|(t, _)| **t >= 0.1 - 1e-12).map(|(_, q)| q).collect::<Vec<_>>();
    let rel = window(r.relative_residual());
    let ctl = window(c.relative_residual());
    let worst = rel.iter().fold(0.0f64, |a, b| a.max(*b));
    let least = ctl.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    Ok((worst <= 0.05 && least > 0.5, format!("max relative residual = {worst:.2e}, least control residual = {least:.2}")))
}

fn c8_shape_smoothness() -> Outcome {
    let (time, space) = grids(32, 16);
    let radial = ShapePath::radial_cosine(0.3, 3).map_err(err)?;
    let translation = ShapePath::translation([0.3, -0.2]).map_err(err)?;
    let kinds = [OperatorKind::V, OperatorKind::Vl(0), OperatorKind::WStar, OperatorKind::W];
    let rows = smoothness_report(&[radial.clone(), translation.clone()], &kinds, 1e-2, time, space).map_err(err)?;
    let (mut ok, mut least_order, mut worst_stab, mut worst_trans) = (true, f64::INFINITY, 1.0f64, 0.0f64);
    for r in &rows {
        if r.path == radial.name && r.order == 1 {
            let p = r.observed_order.unwrap_or(f64::NAN);
            ok &= p >= 1.9;
            least_order = least_order.min(p);
        }
        if r.path == radial.name && r.order == 4 {
            let q = r.stabilization.unwrap_or(f64::NAN);
            ok &= (0.5..=2.0).contains(&q);
            worst_stab = worst_stab.max(q).max(1.0 / q);
        }
        if r.path == translation.name {
            ok &= r.norm <= 1e-12;
            worst_trans = worst_trans.max(r.norm);
        }
    }
    // a single entry of the radial first derivative by an independent central difference
    let h = 5e-3;
    let ap = assemble(OperatorKind::V, &radial.at(h).map_err(err)?, time, space).map_err(err)?;
    let am = assemble(OperatorKind::V, &radial.at(-h).map_err(err)?, time, space).map_err(err)?;
    let own = (ap.lag_blocks()[1][5] - am.lag_blocks()[1][5]) / (2.0 * h);
    let lib = heatlayer::analysis::shape_derivative(OperatorKind::V, &radial, 1, 1e-2, time, space).map_err(err)?;
    let nn = space.len() * space.len();
    let entry = lib.estimate[nn + 5];
    ok &= (own - entry).abs() <= 1e-8 * own.abs().max(1.0);
    Ok((
        ok,
        format!("least order {least_order:.3}, order-4 factor {worst_stab:.3}, translation norm {worst_trans:.1e}, entry check {:.1e}", (own - entry).abs()),
    ))
}

fn c9_toeplitz() -> Outcome {
    let (time, space) = grids(64, 32);
    let phi = rose();
    let mut worst: f64 = 0.0;
    for kind in [OperatorKind::V, OperatorKind::Vl(0), OperatorKind::Vl(1), OperatorKind::WStar, OperatorKind::W] {
        let lag = assemble(kind, &phi, time, space).map_err(err)?;
        let direct = assemble_direct(kind, &phi, time, space);
        for (i, row) in direct.iter().enumerate() {
            for (k, blk) in row.iter().enumerate() {
                let reference = &lag.lag_blocks()[i - k];
                for (a, b) in blk.iter().zip(reference) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    Ok((worst <= 1e-14, format!("max entry deviation = {worst:.2e}")))
}

fn c10_holder() -> Outcome {
    let times: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
    let f = SampledField::from_fn(times.clone(), vec![[0.0, 0.0]], |t, _| t.sqrt()).map_err(err)?;
    let est = parabolic_norm(&f, 1.0, 0, PairSampling::All).map_err(err)?.time_seminorm;
    // the sampled sup of |√t − √s| / |t − s|^½ over the same grid, written out
    let mut own: f64 = 0.0;
    for a in &times {
        for b in &times {
            if a < b {
                own = own.max((b.sqrt() - a.sqrt()) / (b - a).sqrt());
            }
        }
    }
    let phi = BoundaryMap::identity(1.0).map_err(err)?;
    let seeds: Vec<u64> = (0..20).collect();
    let (t1, s1) = grids(16, 8);
    let (t2, s2g) = grids(32, 16);
    let a = operator_norm_ratios(OperatorKind::V, &phi, t1, s1, 0.5, &seeds, PairSampling::All).map_err(err)?;
    let b = operator_norm_ratios(OperatorKind::V, &phi, t2, s2g, 0.5, &seeds, PairSampling::All).map_err(err)?;
    let factor = a.iter().zip(&b).fold(1.0f64, |m, (x, y)| m.max(x / y).max(y / x));
    let ok = (0.99..=1.0).contains(&est) && (est - own).abs() <= 1e-14 && factor <= 2.0;
    Ok((ok, format!("sqrt(t) seminorm = {est:.6}, worst ratio factor under doubling = {factor:.3}")))
}

fn c11_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_heatpot");
    let dir = tempfile::tempdir().map_err(err)?;
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "n = 16\nm = 8\nseed = 11\nalpha = 0.4\n").map_err(err)?;
    let mut compared = 0;
    for exp in ["norms", "jump-test", "shape-sweep", "kernel-check"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{exp}-{run}"));
            let status = Command::new(bin).arg(exp).arg("--config").arg(&config).arg("--out").arg(&out).output().map_err(err)?;
            if !status.status.success() {
                return Ok((false, format!("{exp} exited with {:?}", status.status.code())));
            }
            outputs.push(std::fs::read(out.join(format!("{exp}.csv"))).map_err(err)?);
        }
        if outputs[0] != outputs[1] {
            return Ok((false, format!("{exp}: CSV differs between runs")));
        }
        compared += 1;
    }
    Ok((true, format!("{compared} experiments byte-identical across repeated runs")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "gaussian_mass", c1_gaussian_mass),
        (2, "double_layer_of_one", c2_double_layer_of_one),
        (3, "jump_relations", c3_jump_relations),
        (4, "caloricity", c4_caloricity),
        (5, "pullback_weak_residual", c5_pullback_weak),
        (6, "transmission", c6_transmission),
        (7, "energy_identity", c7_energy),
        (8, "shape_smoothness", c8_shape_smoothness),
        (9, "toeplitz_structure", c9_toeplitz),
        (10, "holder_estimator", c10_holder),
        (11, "determinism", c11_determinism),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {id:>2} {name}: {} ({detail}; {secs:.1} s)", if pass { "PASS" } else { "FAIL" });
        failed += usize::from(!pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
