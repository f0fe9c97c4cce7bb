//! The shift-and-sum map between the signed price density `f` and the
//! heat-equation variable `F`, and its inverse.
//!
//! For `x < p`, `F(x) = Σ_{m≥0} f⁺(x + m·a)`; for `x > p`,
//! `F(x) = -Σ_{m≥0} f⁻(x - m·a)`; `F(p) = 0`. Both parts are extended by
//! zero outside `[-L, L]`. Conversely `f(x) = F(x) - F⁺(x+a) + F⁻(x-a)`.
//!
//! Shifts by `a` are exact node shifts, so the grid must satisfy `a/h ∈ ℕ`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::free_boundary::locate_zero;
use crate::grid::SampledProfile;
use crate::model::{check_grid, ModelParams};

#[inline]
fn positive_part(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

#[inline]
fn negative_part(v: f64) -> f64 {
    if v < 0.0 {
        -v
    } else {
        0.0
    }
}

/// Number of strict sign changes, ignoring exact zeros.
pub fn sign_changes(values: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for &v in values {
        if v != 0.0 {
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                changes += 1;
            }
            last = v;
        }
    }
    changes
}

/// Maps `f` (zero at `p`) to the heat variable `F`.
pub fn forward_transform(
    f: &SampledProfile,
    price: f64,
    params: &ModelParams,
) -> Result<SampledProfile> {
    let grid = *f.grid();
    let shift = check_grid(&grid, params)?;
    let changes = sign_changes(f.values());
    if changes > 1 {
        return Err(Error::SignStructure { changes });
    }
    let v = f.values();
    let n = grid.cells();
    let j = grid.nearest_node(price);
    let heat: Vec<f64> = (0..=n)
        .map(|i| {
            if i < j {
                (i..=n).step_by(shift).map(|m| positive_part(v[m])).sum()
            } else if i > j {
                -(0..=i)
                    .rev()
                    .step_by(shift)
                    .map(|m| negative_part(v[m]))
                    .sum::<f64>()
            } else {
                0.0
            }
        })
        .collect();
    SampledProfile::new(grid, heat)
}

/// Maps a heat profile back to the price density,
/// `f(x) = F(x) - F⁺(x+a) + F⁻(x-a)` with `F^±` zero outside `[-L, L]`.
pub fn inverse_transform(heat: &SampledProfile, params: &ModelParams) -> Result<SampledProfile> {
    let grid = *heat.grid();
    let k = check_grid(&grid, params)?;
    let v = heat.values();
    let n = grid.cells();
    let f = (0..=n)
        .map(|i| {
            let ahead = if i + k <= n { positive_part(v[i + k]) } else { 0.0 };
            let behind = if i >= k { negative_part(v[i - k]) } else { 0.0 };
            v[i] - ahead + behind
        })
        .collect();
    SampledProfile::new(grid, f)
}

/// A density, its heat transform, and the common zero `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformPair {
    pub density: SampledProfile,
    pub heat: SampledProfile,
    pub price: f64,
}

impl TransformPair {
    /// Builds the pair from a density whose zero is at `price`.
    pub fn from_density(
        density: SampledProfile,
        price: f64,
        params: &ModelParams,
    ) -> Result<Self> {
        let heat = forward_transform(&density, price, params)?;
        let price = heat.grid().node(heat.grid().nearest_node(price));
        Ok(Self {
            density,
            heat,
            price,
        })
    }

    /// Builds the pair from a heat profile. Fails when `F` has no single
    /// sign change, since then the inverse map need not produce a
    /// compatible density.
    pub fn from_heat(heat: SampledProfile, params: &ModelParams) -> Result<Self> {
        let price = locate_zero(&heat)?.location;
        let density = inverse_transform(&heat, params)?;
        Ok(Self {
            density,
            heat,
            price,
        })
    }
}
