//! Run configuration.
//!
//! A configuration file is TOML with these sections (every key except
//! `model.L` and `model.a` has a default):
//!
//! ```toml
//! [model]
//! L = 1.0            # half-width of the price domain
//! a = 0.5            # transaction cost, 0 < a < L
//! p0 = 0.0           # initial price, inside (-L+a, L-a)
//!
//! [datum]
//! family = "linear"  # or "smoothed-step"
//! amplitude = 1.0
//! # csv = "datum.csv"  (columns x,f on a uniform grid; replaces family)
//!
//! [grid]
//! n = 400            # cells; a/h must be a whole number
//!
//! [spectral]
//! N = 64             # truncation order
//! # refine = 6       (projection grid has n*refine cells; chosen if absent)
//!
//! [time]
//! # T = 2.28         (horizon; 10/γ₁ if absent)
//! samples = 21       # uniformly spaced sample times over [0, T]
//! # times = [0.05, 0.1, 0.5]   (explicit sample times; replaces samples)
//!
//! [solver]
//! kind = "spectral"  # "fd" or "both"
//!
//! [fd]
//! dt = 1e-4
//! scheme = "crank-nicolson"  # or "implicit-euler"
//!
//! [output]
//! dir = "out"
//!
//! [sweep]            # only read by `sweep`
//! L = [1.0]
//! a = [0.5]
//! MB = [1.0]
//! MV = [0.5, 1.0]
//! ```
//!
//! Overrides of the form `section.key=value` are applied on top of the
//! file; the value is read as a TOML value, or as a string if it does not
//! parse as one.

use std::fs;
use std::path::{Path, PathBuf};

use priceform_core::fd::{FdConfig, Scheme};
use priceform_core::spectral::{decay_rates, eigenfrequencies, MIN_NODES_PER_PERIOD};
use priceform_core::{DatumFamily, Grid, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Context, Result};

pub const DEFAULT_CELLS: usize = 400;
pub const DEFAULT_SAMPLES: usize = 21;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub datum: DatumSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub fd: FdSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "L")]
    pub max_price: f64,
    #[serde(rename = "a")]
    pub cost: f64,
    #[serde(default)]
    pub p0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Linear,
    SmoothedStep,
}

impl From<FamilyName> for DatumFamily {
    fn from(f: FamilyName) -> Self {
        match f {
            FamilyName::Linear => DatumFamily::Linear,
            FamilyName::SmoothedStep => DatumFamily::SmoothedStep,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyName>,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl Default for DatumSection {
    fn default() -> Self {
        Self {
            family: None,
            amplitude: 1.0,
            csv: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

fn default_modes() -> usize {
    priceform_core::spectral::DEFAULT_MODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    #[serde(rename = "N", default = "default_modes")]
    pub modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<usize>,
}

impl Default for SpectralSection {
    fn default() -> Self {
        Self {
            modes: default_modes(),
            refine: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[default]
    Spectral,
    Fd,
    Both,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Spectral => "spectral",
            SolverKind::Fd => "fd",
            SolverKind::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub kind: SolverKind,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    #[default]
    CrankNicolson,
    ImplicitEuler,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::CrankNicolson => Scheme::CrankNicolson,
            SchemeName::ImplicitEuler => Scheme::ImplicitEuler,
        }
    }
}

fn default_dt() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub scheme: SchemeName,
}

impl Default for FdSection {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            scheme: SchemeName::default(),
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(rename = "L")]
    pub max_price: Vec<f64>,
    #[serde(rename = "a")]
    pub cost: Vec<f64>,
    #[serde(rename = "MB")]
    pub buyers: Vec<f64>,
    #[serde(rename = "MV")]
    pub vendors: Vec<f64>,
}

/// Parses `value` as a TOML value, falling back to a bare string.
fn parse_value(value: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()))
}

/// Applies a `section.key=value` override to a parsed document.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let (section, field) = key
        .split_once('.')
        .ok_or_else(|| CliError::Config(format!("override key `{key}` must be section.key")))?;
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let toml::Value::Table(inner) = entry else {
        return Err(CliError::Config(format!("`{section}` is not a section")));
    };
    inner.insert(field.to_string(), parse_value(value.trim()));
    Ok(())
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Reads `path` (or starts from an empty document) and applies the
    /// overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let (text, origin) = match path {
            Some(p) => (
                fs::read_to_string(p).map_err(|source| CliError::Read {
                    path: p.to_path_buf(),
                    source,
                })?,
                p.to_path_buf(),
            ),
            None => (String::new(), PathBuf::from("<flags>")),
        };
        let parsed = Self::parse(&text, &origin)?;
        if overrides.is_empty() {
            return Ok(parsed);
        }
        let mut table: toml::Table = toml::from_str(&text).map_err(|e| CliError::Parse {
            path: origin.clone(),
            message: e.to_string(),
        })?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let merged = toml::to_string(&table).map_err(|e| CliError::Config(e.to_string()))?;
        toml::from_str(&merged).map_err(|e| CliError::Parse {
            path: PathBuf::from(format!("{} (with overrides)", origin.display())),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn params(&self) -> Result<ModelParams> {
        let model = self
            .model
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [model] section with L and a".into()))?;
        ModelParams::new(model.max_price, model.cost, model.p0).context("model")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatumSource {
    Builtin { family: DatumFamily, amplitude: f64 },
    Csv(PathBuf),
}

/// A configuration with every default resolved and every constraint
/// checked.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub datum: DatumSource,
    /// `None` when the grid comes from the datum file.
    pub cells: Option<usize>,
    pub modes: usize,
    pub refine: Option<usize>,
    pub horizon: f64,
    pub sample_times: Vec<f64>,
    pub solver: SolverKind,
    pub fd: FdConfig,
    pub output_dir: PathBuf,
}

/// Smallest factor giving the projection grid at least the minimum
/// number of nodes per shortest basis period.
pub fn required_refinement(params: &ModelParams, modes: usize, grid: &Grid) -> Result<usize> {
    let freqs = eigenfrequencies(params, modes).context("spectral")?;
    let period = 2.0 * std::f64::consts::PI / freqs.max_frequency();
    let factor = (MIN_NODES_PER_PERIOD * grid.step() / period * (1.0 - 1e-12)).ceil();
    Ok(factor.max(1.0) as usize)
}

impl RunConfig {
    pub fn from_file(file: &ConfigFile) -> Result<Self> {
        let params = file.params()?;
        let datum = match (&file.datum.csv, file.datum.family) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "datum: give either `family` or `csv`, not both".into(),
                ))
            }
            (Some(path), None) => DatumSource::Csv(path.clone()),
            (None, family) => {
                let amplitude = file.datum.amplitude;
                if !(amplitude > 0.0 && amplitude.is_finite()) {
                    return Err(CliError::Config(format!(
                        "datum.amplitude must be positive, got {amplitude}"
                    )));
                }
                DatumSource::Builtin {
                    family: family.unwrap_or(FamilyName::Linear).into(),
                    amplitude,
                }
            }
        };
        let cells = match (&datum, file.grid.n) {
            (DatumSource::Builtin { .. }, n) => Some(n.unwrap_or(DEFAULT_CELLS)),
            (DatumSource::Csv(_), n) => n,
        };
        if let Some(n) = cells {
            let grid = Grid::new(params.max_price(), n).context("grid.n")?;
            grid.steps_in(params.cost()).context("grid.n")?;
        }
        let modes = file.spectral.modes;
        if modes == 0 {
            return Err(CliError::Config("spectral.N must be at least 1".into()));
        }
        if file.spectral.refine == Some(0) {
            return Err(CliError::Config("spectral.refine must be at least 1".into()));
        }

        let gamma = decay_rates(&params, 1).rates[0];
        let horizon = match (file.time.horizon, &file.time.times) {
            (Some(t), _) => t,
            (None, Some(times)) => times.iter().copied().fold(0.0, f64::max),
            (None, None) => 10.0 / gamma,
        };
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(CliError::Config(format!("time.T must be non-negative, got {horizon}")));
        }
        let sample_times = match (&file.time.times, file.time.samples) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "time: give either `samples` or `times`, not both".into(),
                ))
            }
            (Some(times), None) => {
                if times.is_empty() {
                    return Err(CliError::Config("time.times is empty".into()));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(CliError::Config("time.times must be strictly increasing".into()));
                }
                if times.iter().any(|t| !(*t >= 0.0 && *t <= horizon)) {
                    return Err(CliError::Config(format!("time.times must lie in [0, {horizon}]")));
                }
                times.clone()
            }
            (None, samples) => {
                let count = samples.unwrap_or(DEFAULT_SAMPLES);
                if count < 2 {
                    return Err(CliError::Config("time.samples must be at least 2".into()));
                }
                (0..count)
                    .map(|i| horizon * i as f64 / (count - 1) as f64)
                    .collect()
            }
        };
        let dt = file.fd.dt;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CliError::Config(format!("fd.dt must be positive, got {dt}")));
        }
        Ok(Self {
            params,
            datum,
            cells,
            modes,
            refine: file.spectral.refine,
            horizon,
            sample_times,
            solver: file.solver.kind,
            fd: FdConfig {
                dt,
                horizon,
                scheme: file.fd.scheme.into(),
            },
            output_dir: file.output.dir.clone(),
        })
    }
}
