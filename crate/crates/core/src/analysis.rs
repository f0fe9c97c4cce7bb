//! Conserved masses, the steady state they determine, the admissibility
//! criterion on the mass ratio, and decay-rate measurement.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::LN_10;

use crate::error::{Error, Result};
use crate::free_boundary::locate_zero;
use crate::grid::{Grid, SampledProfile};
use crate::model::ModelParams;
use crate::quadrature::{simpson_weights, weighted_norm};
use crate::spectral::decay_rates;

/// Relative distance to an end of the ratio interval below which a ratio
/// counts as sitting on it.
const ENDPOINT_TOLERANCE: f64 = 1e-12;

/// Buyer mass `M_B = ∫_{-L}^{p} f` and vendor mass `M_V = -∫_{p}^{L} f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassPair {
    pub buyers: f64,
    pub vendors: f64,
}

impl MassPair {
    pub fn new(buyers: f64, vendors: f64) -> Self {
        Self { buyers, vendors }
    }

    /// Both masses strictly positive, as required of a compatible datum.
    pub fn is_compatible(&self) -> bool {
        self.buyers > 0.0 && self.vendors > 0.0
    }

    pub fn ratio(&self) -> f64 {
        self.buyers / self.vendors
    }

    pub fn total(&self) -> f64 {
        self.buyers + self.vendors
    }
}

/// Value at `x` of the piecewise-linear interpolant of `f`.
fn linear_value(f: &SampledProfile, x: f64) -> f64 {
    f.interpolate(x)
}

/// Value at a kink `c` extrapolated from the two nodes on one side of it,
/// or `None` when those nodes do not exist.
fn extrapolate(f: &SampledProfile, c: f64, from_right: bool) -> Option<f64> {
    let grid = f.grid();
    let (i, _) = grid.locate(c);
    let (j0, j1) = if from_right { (i + 1, i + 2) } else { (i.checked_sub(1)?, i) };
    if j1 > grid.cells() {
        return None;
    }
    let v = f.values();
    let (x0, x1) = (grid.node(j0), grid.node(j1));
    Some(v[j0] + (v[j1] - v[j0]) * (c - x0) / (x1 - x0))
}

/// Trapezoid integral of `f` over `[lo, hi]` through the nodes and the
/// extra breakpoints, each given with its value.
fn integrate_with_breaks(f: &SampledProfile, lo: f64, hi: f64, breaks: &[(f64, f64)]) -> f64 {
    let grid = f.grid();
    let mut points: Vec<(f64, f64)> = f
        .iter()
        .filter(|(x, _)| *x > lo && *x < hi)
        .collect();
    points.push((lo, linear_value(f, lo)));
    points.push((hi, linear_value(f, hi)));
    let eps = 1e-12 * grid.step();
    for &(c, v) in breaks {
        if c > lo + eps && c < hi - eps && !points.iter().any(|(x, _)| libm::fabs(x - c) < eps) {
            points.push((c, v));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

/// Buyer and vendor masses of `f` about the price `p`.
///
/// The cell containing `p` is split at `p`. The cells containing the
/// reinjection points `p ∓ a`, where the density has a kink, are split
/// there too, with the kink value extrapolated from the side facing `p`.
pub fn masses(f: &SampledProfile, price: f64, params: &ModelParams) -> Result<MassPair> {
    let l = params.max_price();
    if !(price > -l && price < l) {
        return Err(Error::Boundary { p: price });
    }
    let a = params.cost();
    let mut breaks = Vec::with_capacity(2);
    for (c, from_right) in [(price - a, true), (price + a, false)] {
        if c > -l && c < l {
            if let Some(v) = extrapolate(f, c, from_right) {
                breaks.push((c, v));
            }
        }
    }
    let buyers = integrate_with_breaks(f, -l, price, &breaks);
    let vendors = -integrate_with_breaks(f, price, l, &breaks);
    Ok(MassPair { buyers, vendors })
}

/// Long-time limit determined by the masses.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub alpha: f64,
    pub price: f64,
    /// Density: `α` left of `p - a`, `-(α/a)(x - p)` across `[p - a, p + a]`,
    /// `-α` right of `p + a`.
    pub density: SampledProfile,
    /// Heat profile `-(α/a)(x - p)`.
    pub heat: SampledProfile,
}

impl SteadyState {
    pub fn density_at(&self, x: f64, cost: f64) -> f64 {
        steady_density(self.alpha, self.price, cost, x)
    }
}

fn steady_density(alpha: f64, price: f64, cost: f64, x: f64) -> f64 {
    (-(alpha / cost) * (x - price)).clamp(-alpha, alpha)
}

/// `α = (M_B + M_V)/(2L - a)` and `p_∞ = M_B/α - L + a/2`.
fn steady_parameters(m: &MassPair, params: &ModelParams) -> (f64, f64) {
    let alpha = m.total() / params.band_length();
    let price = m.buyers / alpha - params.max_price() + 0.5 * params.cost();
    (alpha, price)
}

fn require_positive(m: &MassPair) -> Result<()> {
    if m.is_compatible() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "masses must be positive (M_B = {}, M_V = {})",
            m.buyers, m.vendors
        )))
    }
}

/// Steady state on `grid` for the given masses.
pub fn steady_state(m: &MassPair, params: &ModelParams, grid: &Grid) -> Result<SteadyState> {
    match nonexistence_check(m, params)? {
        Admissibility::Admissible { .. } => {}
        Admissibility::Inadmissible {
            ratio,
            lower,
            upper,
        } => return Err(Error::Nonexistence { ratio, lower, upper }),
    }
    let (alpha, price) = steady_parameters(m, params);
    let a = params.cost();
    let density = SampledProfile::from_fn(*grid, |x| steady_density(alpha, price, a, x));
    let heat = SampledProfile::from_fn(*grid, |x| -(alpha / a) * (x - price));
    Ok(SteadyState {
        alpha,
        price,
        density,
        heat,
    })
}

/// `[a/(4L-3a), (4L-3a)/a]`.
pub fn ratio_interval(params: &ModelParams) -> (f64, f64) {
    let a = params.cost();
    let wide = 4.0 * params.max_price() - 3.0 * a;
    (a / wide, wide / a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    /// The ratio lies in the closed interval. `on_endpoint` marks the
    /// boundary cases, where the limit price sits on `±(L-a)` and is
    /// outside the open band.
    Admissible {
        ratio: f64,
        price: f64,
        on_endpoint: bool,
    },
    Inadmissible {
        ratio: f64,
        lower: f64,
        upper: f64,
    },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible { .. })
    }

    /// Admissible and strictly inside the interval.
    pub fn is_strictly_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible { on_endpoint: false, .. })
    }
}

/// Whether a steady state with limit price in `[-L+a, L-a]` exists.
pub fn nonexistence_check(m: &MassPair, params: &ModelParams) -> Result<Admissibility> {
    require_positive(m)?;
    let ratio = m.ratio();
    let (lower, upper) = ratio_interval(params);
    let near = |edge: f64| libm::fabs(ratio - edge) <= ENDPOINT_TOLERANCE * edge;
    if near(lower) || near(upper) {
        let price = if near(lower) { -params.price_band().1 } else { params.price_band().1 };
        return Ok(Admissibility::Admissible {
            ratio,
            price,
            on_endpoint: true,
        });
    }
    if ratio < lower || ratio > upper {
        return Ok(Admissibility::Inadmissible {
            ratio,
            lower,
            upper,
        });
    }
    let (_, price) = steady_parameters(m, params);
    Ok(Admissibility::Admissible {
        ratio,
        price,
        on_endpoint: false,
    })
}

/// Mass ratios of the steady profiles whose limit price sits at `-L+a` and
/// at `L-a`, computed from the profile integrals
/// `M_B = α(p + L - a/2)`, `M_V = α(L - p - a/2)`.
pub fn boundary_consistency(params: &ModelParams) -> (f64, f64) {
    let l = params.max_price();
    let a = params.cost();
    let ratio_at = |p: f64| (p + l - 0.5 * a) / (l - p - 0.5 * a);
    (ratio_at(-l + a), ratio_at(l - a))
}

/// Default start of the decay fit: the first `t` with
/// `exp(-(γ₂ - γ₁) t) < 0.01`, where `γ₁ < γ₂` are the two slowest rates.
pub fn default_window_start(params: &ModelParams) -> f64 {
    let rates = decay_rates(params, 2).rates;
    2.0 * LN_10 / (rates[1] - rates[0])
}

/// Fitted exponential decay of `‖F(t) - F_∞‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub fit_quality: f64,
    pub samples: usize,
}

/// Fits `log ‖F(t) - F_∞‖ ≈ c - rate·t` over samples with `t ≥ window_start`
/// whose norm is above `1e3 ε ‖F(t_0)‖`, with `t_0` the first sample.
pub fn measure_decay(
    profiles: &[(f64, SampledProfile)],
    steady: &SampledProfile,
    window_start: f64,
) -> Result<DecayFit> {
    let Some((_, first)) = profiles.first() else {
        return Err(Error::InsufficientData("no profiles".into()));
    };
    let grid = steady.grid();
    let weights = simpson_weights(grid.cells(), grid.step());
    let floor = 1e3 * f64::EPSILON * weighted_norm(&weights, first.values());
    let mut points = Vec::new();
    for (t, profile) in profiles {
        if profile.len() != steady.len() {
            return Err(Error::Grid("profile and steady state on different grids".into()));
        }
        if *t < window_start {
            continue;
        }
        let diff: Vec<f64> = profile
            .values()
            .iter()
            .zip(steady.values())
            .map(|(u, v)| u - v)
            .collect();
        let norm = weighted_norm(&weights, &diff);
        if norm > floor {
            points.push((*t, libm::log(norm)));
        }
    }
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable samples after t = {window_start} (need 3)",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.0 - mean_t)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let rss: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (mean_y + slope * (p.0 - mean_t));
            r * r
        })
        .sum();
    Ok(DecayFit {
        rate: -slope,
        fit_quality: libm::sqrt(rss / n),
        samples: points.len(),
    })
}

/// Limit price read off a steady heat profile.
pub fn steady_price(heat: &SampledProfile) -> Result<f64> {
    Ok(locate_zero(heat)?.location)
}
