//! Uniform grids over `[-L, L]` and profiles sampled on them.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative slack allowed when checking that a shift distance is a whole
/// number of grid steps.
const SHIFT_TOLERANCE: f64 = 1e-9;

/// Uniform partition of `[-L, L]` into `cells` equal cells.
///
/// Node `i` sits at `L * (2i - n) / n`, so the endpoints are exactly `-L`
/// and `L` and the grid is exactly symmetric about zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    cells: usize,
}

impl Grid {
    pub fn new(half_width: f64, cells: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Grid(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        if cells < 2 {
            return Err(Error::Grid(format!("need at least 2 cells, got {cells}")));
        }
        Ok(Self { half_width, cells })
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Number of cells `n`; the grid has `n + 1` nodes.
    #[inline]
    pub fn cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        let n = self.cells as f64;
        self.half_width * ((2.0 * i as f64 - n) / n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Number of grid steps in `distance`, which must be a positive whole
    /// multiple of the step.
    pub fn steps_in(&self, distance: f64) -> Result<usize> {
        let ratio = distance / self.step();
        let rounded = libm::round(ratio);
        if !(rounded >= 1.0) || libm::fabs(ratio - rounded) > SHIFT_TOLERANCE * ratio {
            return Err(Error::Grid(format!(
                "a/h = {ratio} must be a positive integer (a = {distance}, h = {})",
                self.step()
            )));
        }
        Ok(rounded as usize)
    }

    /// Index of the node closest to `x`, clamped to the grid.
    pub fn nearest_node(&self, x: f64) -> usize {
        let pos = (x + self.half_width) / self.step();
        let i = libm::round(pos);
        if i <= 0.0 {
            0
        } else if i >= self.cells as f64 {
            self.cells
        } else {
            i as usize
        }
    }

    /// Cell `[x_i, x_{i+1}]` containing `x` and the fractional position of
    /// `x` inside it. `x = L` maps to the last cell with fraction 1.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let pos = (x + self.half_width) / self.step();
        if pos <= 0.0 {
            return (0, 0.0);
        }
        let i = libm::floor(pos) as usize;
        if i >= self.cells {
            return (self.cells - 1, 1.0);
        }
        (i, pos - i as f64)
    }
}

/// Values of a function of `x` at every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledProfile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: alloc::vec![0.0; grid.len()],
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.nodes().zip(self.values.iter().copied())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }

    /// Piecewise-linear interpolation between nodes.
    pub fn interpolate(&self, x: f64) -> f64 {
        let (i, theta) = self.grid.locate(x);
        (1.0 - theta) * self.values[i] + theta * self.values[i + 1]
    }

    /// Discrete derivative: central differences at interior nodes and
    /// first-order one-sided differences at the two ends.
    pub fn gradient(&self) -> Vec<f64> {
        let h = self.grid.step();
        let v = &self.values;
        let n = v.len() - 1;
        (0..=n)
            .map(|i| match i {
                0 => (v[1] - v[0]) / h,
                i if i == n => (v[n] - v[n - 1]) / h,
                i => (v[i + 1] - v[i - 1]) / (2.0 * h),
            })
            .collect()
    }

    pub fn max_abs_gradient(&self) -> f64 {
        self.gradient()
            .into_iter()
            .fold(0.0, |m, d| m.max(libm::fabs(d)))
    }

    /// Keeps every `factor`-th node; `factor` must divide the cell count.
    pub fn restrict_by(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.grid.cells.is_multiple_of(factor) {
            return Err(Error::Grid(format!(
                "cannot coarsen {} cells by a factor of {factor}",
                self.grid.cells
            )));
        }
        let grid = Grid::new(self.grid.half_width, self.grid.cells / factor)?;
        let values = self.values.iter().step_by(factor).copied().collect();
        Ok(Self { grid, values })
    }
}
