use std::io::Write;
use std::path::Path;

use priceform_core::analysis::{
    boundary_consistency, masses, nonexistence_check, ratio_interval, Admissibility, MassPair,
};
use priceform_core::fd::FdWarning;
use priceform_core::spectral::{eigenfrequencies, max_dispersion_residual, project};
use priceform_core::transform::inverse_transform;
use priceform_core::ModelParams;

use crate::config::{RunConfig, SolverKind, SweepSection};
use crate::error::{CliError, Context, Result};
use crate::io::write_table;
use crate::pipeline::{admissibility_lines, prepare, warning_text};

/// How a successful command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Breakdown detected or masses inadmissible.
    Flagged,
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::Write {
        path: "<stdout>".into(),
        source: e,
    }
}

/// Prints the admissibility of the mass pair `(buyers, vendors)`.
pub fn check(
    max_price: f64,
    cost: f64,
    buyers: f64,
    vendors: f64,
    out: &mut impl Write,
) -> Result<Outcome> {
    let params = ModelParams::new(max_price, cost, 0.0).context("parameters")?;
    let m = MassPair::new(buyers, vendors);
    let verdict = nonexistence_check(&m, &params).context("masses")?;
    let (lower, upper) = ratio_interval(&params);
    out.write_all(admissibility_lines(&verdict, lower, upper).as_bytes())
        .map_err(out_err)?;
    match verdict {
        Admissibility::Admissible { on_endpoint, price, .. } => {
            let alpha = m.total() / params.band_length();
            writeln!(out, "alpha: {alpha}").map_err(out_err)?;
            if on_endpoint {
                writeln!(
                    out,
                    "note: the ratio sits on an end of the interval, so the limit price {price} \
                     lies on the edge of (-L+a, L-a); the steady state exists but the path \
                     cannot stay inside the open band"
                )
                .map_err(out_err)?;
            }
            Ok(Outcome::Ok)
        }
        Admissibility::Inadmissible { .. } => Ok(Outcome::Flagged),
    }
}

/// Runs every preflight check of `config` without evolving anything.
pub fn validate(config: &RunConfig, out: &mut impl Write) -> Result<()> {
    let params = config.params;
    let prepared = prepare(config)?;
    let grid = prepared.grid;
    let mut row = |k: &str, v: String| writeln!(out, "{k:<28}{v}").map_err(out_err);
    row("L", params.max_price().to_string())?;
    row("a", params.cost().to_string())?;
    row("p0", prepared.datum.price().to_string())?;
    row("cells", grid.cells().to_string())?;
    row("a/h", grid.steps_in(params.cost()).context("grid")?.to_string())?;
    row("p0 snap distance", prepared.datum.snap_distance().to_string())?;

    let back = inverse_transform(&prepared.heat, &params).context("inverse transform")?;
    let f = prepared.datum.profile();
    let err = back
        .values()
        .iter()
        .zip(f.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = f.max_abs();
    row(
        "transform round trip",
        format!("{:e}", if scale > 0.0 { err / scale } else { err }),
    )?;

    let freqs = eigenfrequencies(&params, config.modes).context("frequencies")?;
    row(
        "max dispersion residual",
        format!("{:e}", max_dispersion_residual(&freqs, &params)),
    )?;
    row("truncation order", config.modes.to_string())?;
    row("projection cells", prepared.projection_grid().cells().to_string())?;
    let p = project(&prepared.fine_heat, &params, config.modes).context("projection")?;
    let d = p.diagnostics;
    let (c1, c2) = d.frame_bounds();
    row("nodes per shortest period", format!("{:.3}", d.nodes_per_period))?;
    row("gram condition", format!("{:.6e}", d.condition()))?;
    row("frame bounds", format!("{c1:.6e} {c2:.6e}"))?;
    row("frequency collisions", d.collisions.to_string())?;
    row("projection residual", format!("{:e}", p.residual))?;

    let m = masses(f, prepared.datum.price(), &params).context("masses")?;
    row("masses", format!("{} {}", m.buyers, m.vendors))?;
    if m.is_compatible() {
        let verdict = nonexistence_check(&m, &params).context("masses")?;
        let status = match verdict {
            Admissibility::Admissible { on_endpoint: false, .. } => "admissible",
            Admissibility::Admissible { on_endpoint: true, .. } => "admissible (interval end)",
            Admissibility::Inadmissible { .. } => "inadmissible: the path will leave the band",
        };
        row("mass ratio", format!("{} ({status})", m.ratio()))?;
    } else {
        row("mass ratio", "undefined (a mass vanishes)".into())?;
    }
    if matches!(config.solver, SolverKind::Fd | SolverKind::Both) {
        let h = grid.step();
        if config.fd.dt > h && config.fd.scheme == priceform_core::fd::Scheme::CrankNicolson {
            row(
                "warning",
                warning_text(&FdWarning::LargeStep {
                    dt: config.fd.dt,
                    step: h,
                }),
            )?;
        }
    }
    Ok(())
}

/// Evaluates the admissibility criterion over the Cartesian product of the
/// sweep lists and writes `sweep.csv` into `dir`. Returns the row count.
pub fn sweep(section: &SweepSection, dir: &Path) -> Result<usize> {
    let mut rows = Vec::new();
    for &l in &section.max_price {
        for &a in &section.cost {
            let params = ModelParams::new(l, a, 0.0)
                .context(format!("sweep point L = {l}, a = {a}"))?;
            let (lower, upper) = ratio_interval(&params);
            let (left, right) = boundary_consistency(&params);
            debug_assert!((left - lower).abs() <= 1e-12 * lower && (right - upper).abs() <= 1e-12 * upper);
            for &mb in &section.buyers {
                for &mv in &section.vendors {
                    let m = MassPair::new(mb, mv);
                    let verdict = nonexistence_check(&m, &params)
                        .context(format!("sweep point MB = {mb}, MV = {mv}"))?;
                    let alpha = m.total() / params.band_length();
                    let p_inf = mb / alpha - l + 0.5 * a;
                    rows.push((l, a, mb, mv, m.ratio(), lower, upper, verdict.is_admissible(), p_inf, alpha));
                }
            }
        }
    }
    let n = rows.len();
    write_table(
        &dir.join("sweep.csv"),
        &["L", "a", "MB", "MV", "ratio", "lo", "hi", "admissible", "p_inf", "alpha"],
        rows,
    )?;
    Ok(n)
}
