//! Model parameters, initial data and their compatibility conditions.

use alloc::format;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledProfile};

/// Domain half-width `L`, transaction cost `a` and initial price `p0`.
///
/// Invariants: `0 < a < L` and `p0` lies in the open band `(-L+a, L-a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    max_price: f64,
    cost: f64,
    initial_price: f64,
}

impl ModelParams {
    pub fn new(max_price: f64, cost: f64, initial_price: f64) -> Result<Self> {
        validate_params(max_price, cost, initial_price)
    }

    /// `L`, the half-width of the price domain.
    #[inline]
    pub fn max_price(&self) -> f64 {
        self.max_price
    }

    /// `a`, the shift between a trade and the reinjection points.
    #[inline]
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// `p0`.
    #[inline]
    pub fn initial_price(&self) -> f64 {
        self.initial_price
    }

    /// The band `(-L+a, L-a)` inside which the original model is well posed.
    #[inline]
    pub fn price_band(&self) -> (f64, f64) {
        (-self.max_price + self.cost, self.max_price - self.cost)
    }

    /// `2L - a`, the period scale of the slow eigenfunction families.
    #[inline]
    pub fn band_length(&self) -> f64 {
        2.0 * self.max_price - self.cost
    }

    /// Same domain and cost, different initial price.
    pub fn with_initial_price(&self, initial_price: f64) -> Result<Self> {
        validate_params(self.max_price, self.cost, initial_price)
    }
}

/// Checks `0 < a < L` and `p0 ∈ (-L+a, L-a)`.
pub fn validate_params(max_price: f64, cost: f64, initial_price: f64) -> Result<ModelParams> {
    if !(max_price.is_finite() && cost.is_finite() && initial_price.is_finite()) {
        return Err(Error::Param(format!(
            "L, a and p0 must be finite (L = {max_price}, a = {cost}, p0 = {initial_price})"
        )));
    }
    if !(cost > 0.0) {
        return Err(Error::Param(format!("a > 0 violated (a = {cost})")));
    }
    if !(cost < max_price) {
        return Err(Error::Param(format!(
            "a < L violated: a ≥ L (a = {cost}, L = {max_price})"
        )));
    }
    let lo = -max_price + cost;
    let hi = max_price - cost;
    if !(initial_price > lo && initial_price < hi) {
        return Err(Error::Param(format!(
            "p0 ∈ (-L+a, L-a) violated: p0 = {initial_price} ∉ ({lo}, {hi})"
        )));
    }
    Ok(ModelParams {
        max_price,
        cost,
        initial_price,
    })
}

/// Tolerance used for the strict sign checks on user-supplied data,
/// relative to `max |f_I|`.
pub const DEFAULT_SIGN_TOLERANCE: f64 = 1e-14;

/// An initial density that is zero at the (snapped) initial price, strictly
/// positive to its left and strictly negative to its right.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibleInitialDatum {
    profile: SampledProfile,
    price_node: usize,
    requested_price: f64,
}

impl CompatibleInitialDatum {
    #[inline]
    pub fn profile(&self) -> &SampledProfile {
        &self.profile
    }

    #[inline]
    pub fn into_profile(self) -> SampledProfile {
        self.profile
    }

    /// Index of the node carrying the zero.
    #[inline]
    pub fn price_node(&self) -> usize {
        self.price_node
    }

    /// The snapped initial price, i.e. the node position of the zero.
    #[inline]
    pub fn price(&self) -> f64 {
        self.profile.grid().node(self.price_node)
    }

    /// `|snapped - requested|`, never more than half a grid step.
    #[inline]
    pub fn snap_distance(&self) -> f64 {
        libm::fabs(self.price() - self.requested_price)
    }
}

/// Validates a user-supplied datum with the default relative tolerance.
pub fn validate_initial_datum(
    profile: SampledProfile,
    params: &ModelParams,
) -> Result<CompatibleInitialDatum> {
    let tolerance = DEFAULT_SIGN_TOLERANCE * profile.max_abs();
    validate_initial_datum_with_tolerance(profile, params, tolerance)
}

/// Validates the `(+, 0, -)` sign pattern about the node nearest `p0`.
///
/// A node counts as zero when `|f| <= tolerance`, as positive when
/// `f > tolerance` and as negative when `f < -tolerance`.
pub fn validate_initial_datum_with_tolerance(
    profile: SampledProfile,
    params: &ModelParams,
    tolerance: f64,
) -> Result<CompatibleInitialDatum> {
    let grid = *profile.grid();
    check_grid(&grid, params)?;
    let requested_price = params.initial_price();
    let price_node = grid.nearest_node(requested_price);
    for (i, &v) in profile.values().iter().enumerate() {
        let reason = if i < price_node && !(v > tolerance) {
            Some("f_I must be strictly positive left of p0")
        } else if i == price_node && !(libm::fabs(v) <= tolerance) {
            Some("f_I must vanish at p0")
        } else if i > price_node && !(v < -tolerance) {
            Some("f_I must be strictly negative right of p0")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::Compatibility {
                node: i,
                x: grid.node(i),
                reason,
            });
        }
    }
    Ok(CompatibleInitialDatum {
        profile,
        price_node,
        requested_price,
    })
}

/// The grid must span `[-L, L]` and resolve the shift `a` exactly.
pub fn check_grid(grid: &Grid, params: &ModelParams) -> Result<usize> {
    if grid.half_width() != params.max_price() {
        return Err(Error::Grid(format!(
            "grid spans [-{0}, {0}] but L = {1}",
            grid.half_width(),
            params.max_price()
        )));
    }
    grid.steps_in(params.cost())
}

/// Built-in initial data families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatumFamily {
    /// `amplitude * (p0 - x)`.
    Linear,
    /// `amplitude * (cos(π(x+L)/2L) - cos(π(p0+L)/2L))`: smooth, bounded,
    /// with zero slope at `±L`, and odd about `p0` when `p0 = 0`.
    SmoothedStep,
}

impl DatumFamily {
    /// Value of the family at `x`, with the zero placed at `price`.
    pub fn value(&self, x: f64, price: f64, amplitude: f64, max_price: f64) -> f64 {
        match self {
            DatumFamily::Linear => amplitude * (price - x),
            DatumFamily::SmoothedStep => {
                let phase = |y: f64| PI * (y + max_price) / (2.0 * max_price);
                amplitude * (libm::cos(phase(x)) - libm::cos(phase(price)))
            }
        }
    }

    /// Exact x-derivative of [`DatumFamily::value`].
    pub fn slope(&self, x: f64, amplitude: f64, max_price: f64) -> f64 {
        match self {
            DatumFamily::Linear => -amplitude,
            DatumFamily::SmoothedStep => {
                let k = PI / (2.0 * max_price);
                -amplitude * k * libm::sin(k * (x + max_price))
            }
        }
    }
}

/// Samples a built-in family on `cells` uniform cells, with `p0` snapped to
/// the nearest node.
pub fn builtin_initial_datum(
    family: DatumFamily,
    params: &ModelParams,
    amplitude: f64,
    cells: usize,
) -> Result<CompatibleInitialDatum> {
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(Error::Param(format!(
            "amplitude > 0 violated (amplitude = {amplitude})"
        )));
    }
    let grid = Grid::new(params.max_price(), cells)?;
    check_grid(&grid, params)?;
    let price = grid.node(grid.nearest_node(params.initial_price()));
    let profile = SampledProfile::from_fn(grid, |x| {
        family.value(x, price, amplitude, params.max_price())
    });
    validate_initial_datum_with_tolerance(profile, params, 0.0)
}
