//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! straight to stdout (bypassing the test harness capture) and then
//! asserts the same condition.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use priceform::config::{ConfigFile, RunConfig};
use priceform::io::write_table;
use priceform::pipeline::{simulate, RunReport};
use priceform_core::analysis::{
    default_window_start, masses, measure_decay, nonexistence_check, steady_state,
    Admissibility, MassPair,
};
use priceform_core::free_boundary::{locate_zero, GlobalExistence};
use priceform_core::model::validate_initial_datum;
use priceform_core::spectral::{
    decay_rates, eigenfrequencies, max_dispersion_residual, steady_part,
};
use priceform_core::transform::{forward_transform, inverse_transform};
use priceform_core::{Grid, ModelParams, SampledProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("acceptance {criterion} {verdict} {name}: {detail}\n");
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}

fn gamma1() -> f64 {
    std::f64::consts::PI.powi(2) / 1.5f64.powi(2)
}

fn run(toml: &str) -> RunReport {
    let file = ConfigFile::parse(toml, Path::new("acceptance.toml")).unwrap();
    simulate(&RunConfig::from_file(&file).unwrap()).unwrap()
}

fn scratch() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| tempfile::tempdir().unwrap()).path()
}

/// Piecewise linear density with slope `-left` below 0 and `-right` above,
/// on 400 cells over [-1, 1]; its masses are `left / 2` and `right / 2`.
fn kinked_datum(left: f64, right: f64) -> PathBuf {
    let path = scratch().join(format!("kinked_{left}_{right}.csv"));
    let grid = Grid::new(1.0, 400).unwrap();
    let f = SampledProfile::from_fn(grid, |x| if x < 0.0 { -left * x } else { -right * x });
    write_table(&path, &["x", "f"], f.iter()).unwrap();
    path
}

const CROSS_VALIDATION: &str = r#"
[model]
L = 1.0
a = 0.5
p0 = 0.0
[grid]
n = 400
[spectral]
N = 64
[time]
times = [0.05, 0.1, 0.5]
[solver]
kind = "both"
[fd]
dt = 1e-4
"#;

/// The cross-validation run and its refinement with h and dt halved.
fn cross_validation() -> &'static (RunReport, RunReport, f64) {
    static RUNS: OnceLock<(RunReport, RunReport, f64)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let coarse = run(CROSS_VALIDATION);
        let fine = run(&CROSS_VALIDATION
            .replace("n = 400", "n = 800")
            .replace("dt = 1e-4", "dt = 5e-5"));
        (coarse, fine, start.elapsed().as_secs_f64())
    })
}

/// Symmetric linear datum over [0, 10/γ₁] with 21 samples.
fn symmetric(kind: &str) -> &'static RunReport {
    static SPECTRAL: OnceLock<RunReport> = OnceLock::new();
    static FD: OnceLock<RunReport> = OnceLock::new();
    let cell = if kind == "spectral" { &SPECTRAL } else { &FD };
    cell.get_or_init(|| {
        // dt = 10 h² for the finite-difference run
        run(&format!(
            "[model]\nL = 1.0\na = 0.5\n[grid]\nn = 400\n[solver]\nkind = \"{kind}\"\n[fd]\ndt = 2.5e-4\n"
        ))
    })
}

/// Admissible asymmetric run with M_B / M_V = 2 over [0, 10/γ₁].
fn ratio_two() -> &'static RunReport {
    static RUN: OnceLock<RunReport> = OnceLock::new();
    RUN.get_or_init(|| {
        let csv = kinked_datum(2.0, 1.0);
        run(&format!(
            "[model]\nL = 1.0\na = 0.5\n[datum]\ncsv = {:?}\n[time]\nsamples = 41\n",
            csv.display().to_string()
        ))
    })
}

/// Inadmissible run with M_B / M_V = 6.
fn ratio_six() -> &'static RunReport {
    static RUN: OnceLock<RunReport> = OnceLock::new();
    RUN.get_or_init(|| {
        let csv = kinked_datum(6.0, 1.0);
        run(&format!(
            "[model]\nL = 1.0\na = 0.5\n[datum]\ncsv = {:?}\n[time]\nsamples = 41\n",
            csv.display().to_string()
        ))
    })
}

fn relative_drift(value: f64, initial: f64) -> f64 {
    (value - initial).abs() / initial.abs()
}

#[test]
fn criterion_1_transform_round_trip() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let cost = [0.25, 0.5, 0.8][k % 3];
        let band = 1.0 - cost;
        let params = ModelParams::new(1.0, cost, rng.random_range(-band..band)).unwrap();
        let grid = Grid::new(1.0, 400).unwrap();
        let p0 = grid.node(grid.nearest_node(params.initial_price()));
        // a positive weight times (p0 - x) keeps a single sign change
        let weights: Vec<f64> = (0..4).map(|_| rng.random_range(-0.2..0.2)).collect();
        let scale = rng.random_range(0.1..10.0);
        let f = SampledProfile::from_fn(grid, |x| {
            let w: f64 = weights
                .iter()
                .enumerate()
                .map(|(j, b)| b * ((j + 1) as f64 * std::f64::consts::PI * x).cos())
                .sum();
            scale * (p0 - x) * (1.0 + w)
        });
        let params = params.with_initial_price(p0).unwrap();
        let datum = validate_initial_datum(f, &params).unwrap();
        let heat = forward_transform(datum.profile(), datum.price(), &params).unwrap();
        let back = inverse_transform(&heat, &params).unwrap();
        let f = datum.profile();
        let err = back
            .values()
            .iter()
            .zip(f.values())
            .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        worst = worst.max(err / f.max_abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "transform round trip",
        worst <= 1e-12 && elapsed < 1.0,
        &format!("max relative error {worst:.3e} (bound 1e-12), runtime {elapsed:.3} s (bound 1 s)"),
    );
}

#[test]
fn criterion_2_dispersion_residuals() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (l, a) in [(1.0, 0.5), (1.0, 0.25), (1.0, 0.8), (1.0, 0.37), (2.5, 0.3)] {
        let params = ModelParams::new(l, a, 0.0).unwrap();
        let freqs = eigenfrequencies(&params, 128).unwrap();
        worst = worst.max(max_dispersion_residual(&freqs, &params));
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        2,
        "dispersion residuals",
        worst < 1e-12 && elapsed < 0.1,
        &format!("max residual {worst:.3e} (bound 1e-12), runtime {elapsed:.4} s (bound 0.1 s)"),
    );
}

#[test]
fn criterion_3_spectral_fd_cross_validation() {
    let (coarse, fine, elapsed) = cross_validation();
    let mut pass = *elapsed < 30.0;
    let mut detail = Vec::new();
    for ((t, c), (_, f)) in coarse.comparison.iter().zip(&fine.comparison) {
        let ratio = c / f;
        pass &= *c < 1e-3 && (3.0..=5.0).contains(&ratio);
        detail.push(format!("t={t}: {c:.3e} halving ratio {ratio:.3}"));
    }
    pass &= coarse.comparison.len() == 3 && fine.comparison.len() == 3;
    report(
        3,
        "spectral-FD cross validation",
        pass,
        &format!("{}; runtime {elapsed:.2} s (bound 30 s)", detail.join(", ")),
    );
}

#[test]
fn criterion_4_exponential_decay() {
    let (coarse, _, _) = cross_validation();
    let params = coarse.prepared.config.params;
    let projection = coarse.projection.as_ref().unwrap();
    let grid = coarse.prepared.grid;
    let (slope, offset) = steady_part(&projection.coefficients);
    let steady = SampledProfile::from_fn(grid, |x| slope * x + offset);
    let start = default_window_start(&params);
    let horizon = 10.0 / gamma1();
    let profiles: Vec<(f64, SampledProfile)> = (0..=80)
        .map(|i| {
            let t = start + (horizon - start) * i as f64 / 80.0;
            (t, projection.profile_at(&grid, t))
        })
        .collect();
    let fit = measure_decay(&profiles, &steady, start).unwrap();
    let g1 = decay_rates(&params, 1).rates[0];
    let error = (fit.rate - g1).abs() / g1;
    report(
        4,
        "exponential decay",
        error <= 0.05,
        &format!(
            "measured rate {:.5} vs gamma_1 {g1:.5} (relative error {error:.3}, bound 0.05); \
             the datum is odd about 0, so the gamma_1 mode is absent and the rate is {:.3} gamma_1",
            fit.rate,
            fit.rate / g1
        ),
    );
}

#[test]
fn criterion_5_conservation() {
    let mut spectral_strip = 0.0f64;
    let mut fd_strip = 0.0f64;
    let mut mass = 0.0f64;
    let runs = [
        ("spectral", symmetric("spectral")),
        ("fd", symmetric("fd")),
        ("spectral", ratio_two()),
        ("both", &cross_validation().0),
    ];
    for (kind, r) in runs {
        let (l0, r0) = forward_strips(r);
        for s in &r.samples {
            let drift = relative_drift(s.strips.0, l0).max(relative_drift(s.strips.1, r0));
            if kind == "fd" {
                fd_strip = fd_strip.max(drift);
            } else {
                spectral_strip = spectral_strip.max(drift);
            }
            if s.point.status.as_str() == "interior" {
                let m = r.initial_masses;
                mass = mass
                    .max(relative_drift(s.masses.buyers, m.buyers))
                    .max(relative_drift(s.masses.vendors, m.vendors));
            }
        }
    }
    // the finite-difference strips of the cross-validation run
    let (coarse, _, _) = cross_validation();
    let params = coarse.prepared.config.params;
    let cfg = coarse.prepared.config.fd;
    let sol = priceform_core::fd::solve_heat_fd(&coarse.prepared.heat, &params, &cfg, &[0.05, 0.1, 0.5])
        .unwrap();
    let (l0, r0) = priceform_core::fd::strip_integrals(&coarse.prepared.heat, &params).unwrap();
    for p in &sol.profiles {
        let (l, r) = priceform_core::fd::strip_integrals(p, &params).unwrap();
        fd_strip = fd_strip.max(relative_drift(l, l0)).max(relative_drift(r, r0));
    }
    report(
        5,
        "conservation",
        spectral_strip < 1e-8 && fd_strip < 1e-6 && mass < 1e-6,
        &format!(
            "strip drift spectral {spectral_strip:.3e} (bound 1e-8), fd {fd_strip:.3e} (bound 1e-6); \
             mass drift {mass:.3e} (bound 1e-6)"
        ),
    );
}

fn forward_strips(r: &RunReport) -> (f64, f64) {
    priceform_core::fd::strip_integrals(&r.prepared.heat, &r.prepared.config.params).unwrap()
}

#[test]
fn criterion_6_steady_state_and_path_limit() {
    let symmetric_worst = [symmetric("spectral"), symmetric("fd"), &cross_validation().0]
        .iter()
        .flat_map(|r| r.path.points().iter().map(|p| p.price.abs()))
        .fold(0.0f64, f64::max);

    let r = ratio_two();
    let params = r.prepared.config.params;
    let m = r.initial_masses;
    let alpha = m.total() / params.band_length();
    let p_inf = m.buyers / alpha - params.max_price() + 0.5 * params.cost();
    let last = r.path.last().unwrap();
    let horizon_ok = (last.time - 10.0 / gamma1()).abs() < 1e-12;
    let path_error = (last.price - p_inf).abs();

    let steady = steady_state(&m, &params, &r.prepared.grid).unwrap();
    let back = masses(&steady.density, steady.price, &params).unwrap();
    let round_trip = relative_drift(back.buyers, m.buyers)
        .max(relative_drift(back.vendors, m.vendors))
        .max((steady.price - p_inf).abs());

    report(
        6,
        "steady state and path limit",
        symmetric_worst < 1e-6 && horizon_ok && path_error < 1e-3 && round_trip < 1e-10,
        &format!(
            "symmetric max |p| {symmetric_worst:.3e} (bound 1e-6); ratio {:.6}: p(T) {:.7} vs \
             p_inf {p_inf:.7} at T {:.4}, error {path_error:.3e} (bound 1e-3); masses(f_inf) \
             round trip {round_trip:.3e} (bound 1e-10)",
            m.ratio(),
            last.price,
            last.time
        ),
    );
}

#[test]
fn criterion_7_nonexistence_reproduction() {
    let r = ratio_six();
    let params = r.prepared.config.params;
    let breakdown = match r.existence {
        GlobalExistence::BreakdownAt { time, .. } if time.is_finite() => Some(time),
        _ => None,
    };
    let verdict = nonexistence_check(&r.initial_masses, &params).unwrap();
    let inadmissible = matches!(verdict, Admissibility::Inadmissible { .. });

    let csv = kinked_datum(6.0, 1.0);
    let dir = scratch().join("ratio_six_cli");
    let config = scratch().join("ratio_six.toml");
    std::fs::write(
        &config,
        format!(
            "[model]\nL = 1.0\na = 0.5\n[datum]\ncsv = {:?}\n[output]\ndir = {:?}\n",
            csv.display().to_string(),
            dir.display().to_string()
        ),
    )
    .unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_priceform"))
        .args(["simulate", "-c"])
        .arg(&config)
        .output()
        .unwrap()
        .status
        .code();

    let symmetric = symmetric("spectral");
    let horizon = symmetric.path.last().unwrap().time;
    let never = matches!(symmetric.existence, GlobalExistence::MassConservingGlobal { .. })
        && horizon >= 10.0 / gamma1() * (1.0 - 1e-12)
        && (symmetric.initial_masses.ratio() - 1.0).abs() < 1e-12;

    report(
        7,
        "non-existence reproduction",
        breakdown.is_some() && status == Some(2) && inadmissible && never,
        &format!(
            "ratio {:.6}: breakdown at {breakdown:?}, exit code {status:?}, inadmissible {inadmissible}; \
             ratio 1 global up to T {horizon:.4}: {never}",
            r.initial_masses.ratio()
        ),
    );
}

#[test]
fn criterion_8_structural_uniqueness() {
    let (coarse, fine, _) = cross_validation();
    let runs = [
        coarse,
        fine,
        symmetric("spectral"),
        symmetric("fd"),
        ratio_two(),
    ];
    let mut checked = 0;
    let mut failures = Vec::new();
    for r in runs {
        for s in &r.samples {
            checked += 1;
            if let Err(e) = locate_zero(&s.heat) {
                failures.push(format!("t={}: {e}", s.time));
            }
        }
    }
    report(
        8,
        "structural uniqueness",
        failures.is_empty(),
        &format!("{checked} samples, {} without a single bracket {failures:?}", failures.len()),
    );
}

#[test]
fn criterion_9_gradient_bound() {
    let (coarse, fine, _) = cross_validation();
    let runs = [
        coarse,
        fine,
        symmetric("spectral"),
        symmetric("fd"),
        ratio_two(),
        ratio_six(),
    ];
    let mut worst = f64::NEG_INFINITY;
    for r in runs {
        let initial = r.prepared.heat.max_abs_gradient();
        for s in &r.samples {
            worst = worst.max((s.max_gradient - initial) / initial);
        }
    }
    report(
        9,
        "gradient bound",
        worst <= 1e-6,
        &format!("max relative growth of max |F_x| {worst:.3e} (bound 1e-6)"),
    );
}

#[test]
fn kinked_data_have_the_intended_masses() {
    let params = ModelParams::new(1.0, 0.5, 0.0).unwrap();
    for (left, right) in [(2.0, 1.0), (6.0, 1.0)] {
        let f = priceform::io::read_datum(&kinked_datum(left, right), 1.0).unwrap();
        let m = masses(&f, 0.0, &params).unwrap();
        assert!((m.buyers - left / 2.0).abs() < 1e-12 && (m.vendors - right / 2.0).abs() < 1e-12);
        assert!((MassPair::new(m.buyers, m.vendors).ratio() - left / right).abs() < 1e-12);
    }
}
