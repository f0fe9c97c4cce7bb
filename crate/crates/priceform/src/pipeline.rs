//! The simulation pipeline: datum → heat profile → evolution → density,
//! free boundary and diagnostics at every sample time.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use priceform_core::analysis::{masses, nonexistence_check, ratio_interval, Admissibility, MassPair};
use priceform_core::fd::{solve_heat_fd, strip_integrals, FdWarning};
use priceform_core::free_boundary::{
    classify_global_existence, compute_lambda, track, FreeBoundaryPath, GlobalExistence,
    PathPoint, TransactionRate,
};
use priceform_core::model::{builtin_initial_datum, validate_initial_datum, CompatibleInitialDatum};
use priceform_core::quadrature::{simpson_weights, weighted_norm};
use priceform_core::spectral::{max_dispersion_residual, project, Projection};
use priceform_core::transform::{forward_transform, inverse_transform};
use priceform_core::{Grid, SampledProfile};

use crate::config::{required_refinement, ConfigFile, DatumSource, RunConfig, SolverKind};
use crate::error::{CliError, Context, Result};
use crate::io::{read_datum, write_table, write_text};

/// Datum and heat profiles on the output grid and on the projection grid.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub config: RunConfig,
    pub grid: Grid,
    pub datum: CompatibleInitialDatum,
    pub heat: SampledProfile,
    pub refine: usize,
    pub fine_heat: SampledProfile,
}

impl PreparedRun {
    pub fn projection_grid(&self) -> &Grid {
        self.fine_heat.grid()
    }
}

/// Builds and validates the initial data for `config`.
pub fn prepare(config: &RunConfig) -> Result<PreparedRun> {
    let params = config.params;
    let l = params.max_price();
    let (datum, fine_density) = match &config.datum {
        DatumSource::Builtin { family, amplitude } => {
            let cells = config.cells.expect("builtin data always have a grid size");
            let datum = builtin_initial_datum(*family, &params, *amplitude, cells)
                .context("initial datum")?;
            let snapped = params
                .with_initial_price(datum.price())
                .context("initial datum")?;
            let grid = *datum.profile().grid();
            let refine = match config.refine {
                Some(r) => r,
                None => required_refinement(&params, config.modes, &grid)?,
            };
            let fine = builtin_initial_datum(*family, &snapped, *amplitude, cells * refine)
                .context("initial datum on the projection grid")?;
            (datum, (refine, fine.into_profile()))
        }
        DatumSource::Csv(path) => {
            let profile = read_datum(path, l)?;
            if let Some(n) = config.cells {
                if n != profile.grid().cells() {
                    return Err(CliError::Config(format!(
                        "grid.n = {n} but {} has {} cells",
                        path.display(),
                        profile.grid().cells()
                    )));
                }
            }
            let grid = *profile.grid();
            grid.steps_in(params.cost()).context("datum grid")?;
            let datum = validate_initial_datum(profile, &params).context("initial datum")?;
            let refine = match config.refine {
                Some(r) => r,
                None => required_refinement(&params, config.modes, &grid)?,
            };
            let fine_grid = Grid::new(l, grid.cells() * refine).context("projection grid")?;
            let fine = SampledProfile::from_fn(fine_grid, |x| datum.profile().interpolate(x));
            (datum, (refine, fine))
        }
    };
    let (refine, fine_density) = fine_density;
    let price = datum.price();
    let heat = forward_transform(datum.profile(), price, &params).context("forward transform")?;
    let fine_heat = forward_transform(&fine_density, price, &params)
        .context("forward transform on the projection grid")?;
    Ok(PreparedRun {
        config: config.clone(),
        grid: *heat.grid(),
        datum,
        heat,
        refine,
        fine_heat,
    })
}

/// Everything recorded at one sample time.
#[derive(Debug, Clone)]
pub struct Sample {
    pub time: f64,
    pub heat: SampledProfile,
    pub density: SampledProfile,
    pub point: PathPoint,
    /// `None` when the price is within one step of a wall.
    pub lambda: Option<TransactionRate>,
    pub masses: MassPair,
    pub strips: (f64, f64),
    pub max_gradient: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub prepared: PreparedRun,
    pub samples: Vec<Sample>,
    pub path: FreeBoundaryPath,
    pub existence: GlobalExistence,
    pub initial_masses: MassPair,
    /// `None` when a mass vanishes.
    pub admissibility: Option<Admissibility>,
    pub projection: Option<Projection>,
    pub fd_dt: Option<f64>,
    pub fd_warnings: Vec<FdWarning>,
    /// `(t, relative L² discrepancy)` between the two solvers.
    pub comparison: Vec<(f64, f64)>,
}

impl RunReport {
    pub fn broke_down(&self) -> bool {
        matches!(self.existence, GlobalExistence::BreakdownAt { .. })
    }
}

fn l2(p: &[f64], grid: &Grid) -> f64 {
    weighted_norm(&simpson_weights(grid.cells(), grid.step()), p)
}

/// Relative L² distance `‖a - b‖ / ‖b‖`.
pub fn relative_l2(a: &SampledProfile, b: &SampledProfile) -> f64 {
    let diff: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    let reference = l2(b.values(), b.grid());
    let d = l2(&diff, a.grid());
    if reference > 0.0 {
        d / reference
    } else {
        d
    }
}

/// Runs the configured solver(s) and collects the diagnostics.
pub fn simulate(config: &RunConfig) -> Result<RunReport> {
    let prepared = prepare(config)?;
    let params = config.params;
    let grid = prepared.grid;
    let times = &config.sample_times;

    let projection = match config.solver {
        SolverKind::Spectral | SolverKind::Both => Some(
            project(&prepared.fine_heat, &params, config.modes).context("spectral projection")?,
        ),
        SolverKind::Fd => None,
    };
    let spectral_profiles = projection.as_ref().map(|p| {
        times
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    prepared.heat.clone()
                } else {
                    p.profile_at(&grid, t)
                }
            })
            .collect::<Vec<_>>()
    });
    let fd = match config.solver {
        SolverKind::Fd | SolverKind::Both => Some(
            solve_heat_fd(&prepared.heat, &params, &config.fd, times)
                .context("finite-difference solve")?,
        ),
        SolverKind::Spectral => None,
    };

    let comparison = match (&spectral_profiles, &fd) {
        (Some(s), Some(f)) => times
            .iter()
            .zip(s.iter().zip(&f.profiles))
            .map(|(t, (s, f))| (*t, relative_l2(f, s)))
            .collect(),
        _ => Vec::new(),
    };
    let (fd_dt, fd_warnings, fd_profiles) = match fd {
        Some(sol) => (Some(sol.dt), sol.warnings, Some(sol.profiles)),
        None => (None, Vec::new(), None),
    };
    let profiles = spectral_profiles
        .or(fd_profiles)
        .expect("at least one solver runs");

    let timed: Vec<(f64, SampledProfile)> = times.iter().copied().zip(profiles).collect();
    let path = track(&timed, &params).context("free boundary")?;
    let existence = classify_global_existence(&path);

    let mut samples = Vec::with_capacity(timed.len());
    for ((time, heat), point) in timed.into_iter().zip(path.points()) {
        let density = if time == 0.0 {
            prepared.datum.profile().clone()
        } else {
            inverse_transform(&heat, &params).context(format!("inverse transform at t = {time}"))?
        };
        let m = masses(&density, point.price, &params).context(format!("masses at t = {time}"))?;
        let lambda = compute_lambda(&density, point.price).ok();
        let strips = strip_integrals(&heat, &params).context("strip integrals")?;
        let max_gradient = heat.max_abs_gradient();
        samples.push(Sample {
            time,
            heat,
            density,
            point: *point,
            lambda,
            masses: m,
            strips,
            max_gradient,
        });
    }
    let initial_masses = masses(prepared.datum.profile(), prepared.datum.price(), &params)
        .context("initial masses")?;
    let admissibility = if initial_masses.is_compatible() {
        Some(nonexistence_check(&initial_masses, &params).context("mass ratio")?)
    } else {
        None
    };

    Ok(RunReport {
        prepared,
        samples,
        path,
        existence,
        initial_masses,
        admissibility,
        projection,
        fd_dt,
        fd_warnings,
        comparison,
    })
}

/// The file configuration with every default written out, so that the
/// run can be repeated from it alone.
pub fn effective_config(file: &ConfigFile, report: &RunReport) -> ConfigFile {
    let cfg = &report.prepared.config;
    let mut out = file.clone();
    if let Some(model) = out.model.as_mut() {
        model.p0 = report.prepared.datum.price();
    }
    if let DatumSource::Csv(path) = &cfg.datum {
        out.datum.csv = Some(std::fs::canonicalize(path).unwrap_or_else(|_| path.clone()));
    }
    out.grid.n = Some(report.prepared.grid.cells());
    out.spectral.refine = Some(report.prepared.refine);
    out.time.horizon = Some(cfg.horizon);
    out.time.samples = None;
    out.time.times = Some(cfg.sample_times.clone());
    out.sweep = None;
    out
}

fn existence_line(e: &GlobalExistence) -> String {
    match e {
        GlobalExistence::MassConservingGlobal { horizon } => {
            format!("mass-conserving-global over [0, {horizon:?}] (sampled times only)")
        }
        GlobalExistence::BreakdownAt { time, index } => {
            format!("breakdown at t = {time:?} (sample {index})")
        }
    }
}

pub fn admissibility_lines(a: &Admissibility, lower: f64, upper: f64) -> String {
    let mut s = String::new();
    match a {
        Admissibility::Admissible {
            ratio,
            price,
            on_endpoint,
        } => {
            let _ = writeln!(s, "mass ratio: {ratio}");
            let _ = writeln!(s, "ratio interval: [{lower}, {upper}]");
            let _ = writeln!(s, "closed interval: admissible");
            let open = if *on_endpoint { "inadmissible (limit price on the band edge)" } else { "admissible" };
            let _ = writeln!(s, "open band: {open}");
            let _ = writeln!(s, "limit price: {price}");
        }
        Admissibility::Inadmissible { ratio, .. } => {
            let _ = writeln!(s, "mass ratio: {ratio}");
            let _ = writeln!(s, "ratio interval: [{lower}, {upper}]");
            let _ = writeln!(s, "closed interval: inadmissible");
            let _ = writeln!(s, "open band: inadmissible");
        }
    }
    s
}

fn manifest(report: &RunReport, files: &[String]) -> String {
    let cfg = &report.prepared.config;
    let params = cfg.params;
    let grid = report.prepared.grid;
    let mut s = String::new();
    let _ = writeln!(s, "priceform {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "command: simulate");
    let _ = writeln!(s, "L: {:?}", params.max_price());
    let _ = writeln!(s, "a: {:?}", params.cost());
    let _ = writeln!(s, "p0: {:?}", report.prepared.datum.price());
    let _ = writeln!(s, "p0 snap distance: {:?}", report.prepared.datum.snap_distance());
    match &cfg.datum {
        DatumSource::Builtin { family, amplitude } => {
            let _ = writeln!(s, "datum: builtin {family:?} amplitude {amplitude}");
        }
        DatumSource::Csv(p) => {
            let _ = writeln!(s, "datum: csv {}", p.display());
        }
    }
    let _ = writeln!(s, "cells: {}", grid.cells());
    let _ = writeln!(s, "step: {:?}", grid.step());
    let _ = writeln!(s, "solver: {}", cfg.solver.as_str());
    let _ = writeln!(s, "horizon: {:?}", cfg.horizon);
    let _ = writeln!(s, "samples: {}", cfg.sample_times.len());
    if let Some(p) = &report.projection {
        let d = &p.diagnostics;
        let (c1, c2) = d.frame_bounds();
        let _ = writeln!(s, "truncation order: {}", cfg.modes);
        let _ = writeln!(s, "projection cells: {}", report.prepared.projection_grid().cells());
        let _ = writeln!(s, "nodes per shortest period: {:?}", d.nodes_per_period);
        let _ = writeln!(s, "projection residual: {:?}", p.residual);
        let _ = writeln!(s, "gram condition: {:?}", d.condition());
        let _ = writeln!(s, "frame bounds: {c1:?} {c2:?}");
        let _ = writeln!(s, "frequency collisions: {}", d.collisions);
        let _ = writeln!(
            s,
            "max dispersion residual: {:?}",
            max_dispersion_residual(&p.frequencies, &params)
        );
    }
    if let Some(dt) = report.fd_dt {
        let _ = writeln!(s, "fd scheme: {:?}", cfg.fd.scheme);
        let _ = writeln!(s, "fd dt: {dt:?}");
    }
    if let Some(max) = report.comparison.iter().map(|c| c.1).reduce(f64::max) {
        let _ = writeln!(s, "max relative l2 discrepancy: {max:?}");
    }
    let m = report.initial_masses;
    let _ = writeln!(s, "initial masses: {:?} {:?}", m.buyers, m.vendors);
    let (lower, upper) = ratio_interval(&params);
    match &report.admissibility {
        Some(a) => s.push_str(&admissibility_lines(a, lower, upper)),
        None => {
            let _ = writeln!(s, "mass ratio: undefined (a mass vanishes)");
        }
    }
    let _ = writeln!(s, "existence: {}", existence_line(&report.existence));
    for w in &report.fd_warnings {
        let _ = writeln!(s, "warning: {}", warning_text(w));
    }
    let _ = writeln!(s, "files:");
    for f in files {
        let _ = writeln!(s, "  {f}");
    }
    let _ = writeln!(s, "rerun: priceform simulate --config config.toml --set output.dir=<dir>");
    s
}

pub fn warning_text(w: &FdWarning) -> String {
    match w {
        FdWarning::LargeStep { dt, step } => {
            format!("crank-nicolson step dt = {dt} exceeds h = {step}; rough data may ring")
        }
        FdWarning::SnappedTime { requested, actual } => {
            format!("sample time {requested} moved to time level {actual}")
        }
    }
}

fn nan_or(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Writes every output of `report` into `dir`; returns the file names.
pub fn write_run(dir: &Path, file: &ConfigFile, report: &RunReport) -> Result<Vec<String>> {
    let mut files = Vec::new();
    let mut add = |name: String| -> PathBuf {
        let p = dir.join(&name);
        files.push(name);
        p
    };

    let config_text = effective_config(file, report).to_toml()?;
    write_text(&add("config.toml".into()), &config_text)?;

    let mut index = Vec::with_capacity(report.samples.len());
    for (i, s) in report.samples.iter().enumerate() {
        let name = format!("profiles/profile_{i:04}.csv");
        let rows = s
            .heat
            .iter()
            .zip(s.density.values())
            .map(|((x, heat), f)| (x, *f, heat));
        write_table(&add(name.clone()), &["x", "f", "F"], rows)?;
        index.push((i, s.time, name));
    }
    write_table(&add("times.csv".into()), &["index", "t", "file"], index)?;

    write_table(
        &add("path.csv".into()),
        &["t", "p", "status", "lambda"],
        report.samples.iter().map(|s| {
            (
                s.time,
                s.point.price,
                s.point.status.as_str(),
                nan_or(s.lambda.map(|l| l.value)),
            )
        }),
    )?;
    write_table(
        &add("masses.csv".into()),
        &["t", "MB", "MV"],
        report
            .samples
            .iter()
            .map(|s| (s.time, s.masses.buyers, s.masses.vendors)),
    )?;
    write_table(
        &add("strips.csv".into()),
        &["t", "left", "right"],
        report.samples.iter().map(|s| (s.time, s.strips.0, s.strips.1)),
    )?;

    if let Some(p) = &report.projection {
        let freqs = &p.frequencies;
        let c = &p.coefficients;
        let mut rows: Vec<(String, usize, f64)> = Vec::new();
        for (name, values) in [("shift_sin", &c.shift_sine), ("shift_cos", &c.shift_cosine)] {
            rows.extend(values.iter().enumerate().map(|(i, v)| (name.to_string(), i + 1, *v)));
        }
        rows.extend(c.band_sine.iter().enumerate().map(|(i, v)| {
            let name = if freqs.sine_is_generalized(i) { "band_x_cos" } else { "band_sin" };
            (name.to_string(), i + 1, *v)
        }));
        rows.extend(c.band_cosine.iter().enumerate().map(|(i, v)| {
            let name = if freqs.cosine_is_generalized(i) { "band_x_sin" } else { "band_cos" };
            (name.to_string(), i + 1, *v)
        }));
        rows.push(("slope".into(), 0, c.slope));
        rows.push(("offset".into(), 0, c.offset));
        write_table(&add("coefficients.csv".into()), &["family", "l", "value"], rows)?;

        let mut rows: Vec<(&str, usize, f64)> = Vec::new();
        for (name, values) in [
            ("shift", freqs.shift()),
            ("band_sine", freqs.band_sine()),
            ("band_cosine", freqs.band_cosine()),
        ] {
            rows.extend(values.iter().enumerate().map(|(i, v)| (name, i + 1, *v)));
        }
        write_table(&add("frequencies.csv".into()), &["family", "l", "value"], rows)?;
    }

    if !report.comparison.is_empty() {
        let mut running = 0.0f64;
        let rows: Vec<(f64, f64, f64)> = report
            .comparison
            .iter()
            .map(|&(t, d)| {
                running = running.max(d);
                (t, d, running)
            })
            .collect();
        write_table(
            &add("comparison.csv".into()),
            &["t", "rel_l2_discrepancy", "max_rel_l2_discrepancy"],
            rows,
        )?;
    }

    files.push("manifest.txt".into());
    let text = manifest(report, &files);
    write_text(&dir.join("manifest.txt"), &text)?;
    Ok(files)
}
