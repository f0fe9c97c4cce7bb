use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use priceform::commands::{self, Outcome};
use priceform::config::{ConfigFile, RunConfig};
use priceform::pipeline::{simulate, warning_text, write_run};
use priceform::{CliError, Result};

#[derive(Parser)]
#[command(name = "priceform", version, about = "Price formation with transaction costs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a datum and write profiles, path, masses and diagnostics.
    Simulate(RunArgs),
    /// Report whether a mass pair admits a steady state inside the band.
    Check(CheckArgs),
    /// Run the preflight checks of a configuration without evolving it.
    Validate(RunArgs),
    /// Evaluate the admissibility criterion over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Overrides {
    /// Override a configuration key, e.g. `--set grid.n=800`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    #[arg(long = "L", value_name = "L")]
    max_price: Option<f64>,
    #[arg(long = "a", value_name = "A")]
    cost: Option<f64>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Truncation order of the series.
    #[arg(long = "modes", value_name = "N")]
    modes: Option<usize>,
    /// Horizon T.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// spectral, fd or both.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    /// crank-nicolson or implicit-euler.
    #[arg(long)]
    scheme: Option<String>,
    /// linear or smoothed-step.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// CSV datum with columns x,f.
    #[arg(long)]
    datum: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn assignments(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut num = |key: &str, value: Option<String>| {
            if let Some(value) = value {
                v.push(format!("{key}={value}"));
            }
        };
        let float = |x: Option<f64>| x.map(|x| format!("{x:?}"));
        let quoted = |x: &Option<String>| x.as_ref().map(|s| format!("{s:?}"));
        let path = |x: &Option<PathBuf>| x.as_ref().map(|p| format!("{:?}", p.display().to_string()));
        num("model.L", float(self.max_price));
        num("model.a", float(self.cost));
        num("model.p0", float(self.p0));
        num("grid.n", self.n.map(|n| n.to_string()));
        num("spectral.N", self.modes.map(|n| n.to_string()));
        num("time.T", float(self.horizon));
        num("time.samples", self.samples.map(|n| n.to_string()));
        num("solver.kind", quoted(&self.solver));
        num("fd.dt", float(self.dt));
        num("fd.scheme", quoted(&self.scheme));
        num("datum.family", quoted(&self.family));
        num("datum.amplitude", float(self.amplitude));
        num("datum.csv", path(&self.datum));
        num("output.dir", path(&self.out));
        let mut all = self.set.clone();
        all.extend(v);
        all
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct CheckArgs {
    /// Read L and a from the [model] section of this file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long = "L", value_name = "L")]
    max_price: Option<f64>,
    #[arg(long = "a", value_name = "A")]
    cost: Option<f64>,
    /// Buyer mass.
    #[arg(long)]
    mb: f64,
    /// Vendor mass.
    #[arg(long)]
    mv: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with a [sweep] section.
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs) -> Result<(ConfigFile, RunConfig)> {
    let file = ConfigFile::load(args.config.as_deref(), &args.overrides.assignments())?;
    let run = RunConfig::from_file(&file)?;
    Ok((file, run))
}

fn run(cli: Cli) -> Result<Outcome> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Simulate(args) => {
            let (file, cfg) = load(&args)?;
            let report = simulate(&cfg)?;
            for w in &report.fd_warnings {
                eprintln!("warning: {}", warning_text(w));
            }
            let files = write_run(&cfg.output_dir, &file, &report)?;
            println!("wrote {} files to {}", files.len(), cfg.output_dir.display());
            match report.existence {
                priceform_core::free_boundary::GlobalExistence::BreakdownAt { time, .. } => {
                    println!("breakdown at t = {time}");
                    Ok(Outcome::Flagged)
                }
                priceform_core::free_boundary::GlobalExistence::MassConservingGlobal { horizon } => {
                    println!("price stayed inside the band up to t = {horizon}");
                    Ok(Outcome::Ok)
                }
            }
        }
        Command::Validate(args) => {
            let (_, cfg) = load(&args)?;
            commands::validate(&cfg, &mut out)?;
            Ok(Outcome::Ok)
        }
        Command::Check(args) => {
            let model = match &args.config {
                Some(path) => ConfigFile::load(Some(path), &[])?.model,
                None => None,
            };
            let max_price = args
                .max_price
                .or(model.as_ref().map(|m| m.max_price))
                .ok_or_else(|| CliError::Config("check needs --L or a config with [model]".into()))?;
            let cost = args
                .cost
                .or(model.as_ref().map(|m| m.cost))
                .ok_or_else(|| CliError::Config("check needs --a or a config with [model]".into()))?;
            commands::check(max_price, cost, args.mb, args.mv, &mut out)
        }
        Command::Sweep(args) => {
            let mut set = args.set.clone();
            if let Some(dir) = &args.out {
                set.push(format!("output.dir={:?}", dir.display().to_string()));
            }
            let file = ConfigFile::load(Some(&args.config), &set)?;
            let section = file
                .sweep
                .as_ref()
                .ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
            let rows = commands::sweep(section, &file.output.dir)?;
            println!("wrote {rows} rows to {}", file.output.dir.join("sweep.csv").display());
            Ok(Outcome::Ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Flagged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
