//! Series solution of the heat problem with the nonlocal boundary coupling
//! `F_x(±L) = F_x(±L ∓ a)`.
//!
//! The eigenfunctions come in three families,
//!
//! * `sin(ω x)`, `cos(ω x)` with `ω = 2πl/a` (the *shift* family),
//! * `sin(ω x)` with `ω = 2πl/(2L-a)` (the *band sine* family),
//! * `cos(ω x)` with `ω = (2l-1)π/(2L-a)` (the *band cosine* family),
//!
//! plus the stationary pair `x` and `1`. Each oscillatory mode decays like
//! `exp(-ω² t)`.
//!
//! When `a/(2L-a)` is rational a band frequency can coincide with a shift
//! frequency. The dispersion function then has a double zero and the
//! duplicated eigenfunction is replaced by the generalized one
//! (`x cos(ωx)` for the sine family, `x sin(ωx)` for the cosine family),
//! whose coefficient feeds its partner linearly in time:
//!
//! ```text
//! x cos(ωx) ↦ e^{-ω²t} (x cos(ωx) - 2ωt sin(ωx))
//! x sin(ωx) ↦ e^{-ω²t} (x sin(ωx) + 2ωt cos(ωx))
//! ```

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd::strip_integrals;
use crate::grid::{Grid, SampledProfile};
use crate::model::{check_grid, ModelParams};
use crate::quadrature::{simpson_weights, weighted_norm};

/// Default truncation order.
pub const DEFAULT_MODES: usize = 64;

/// Minimum number of grid nodes per period of the fastest basis function.
pub const MIN_NODES_PER_PERIOD: f64 = 8.0;

/// Largest accepted condition estimate of the normalized Gram matrix.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative tolerance for treating two frequencies as equal.
const COLLISION_TOLERANCE: f64 = 1e-9;

/// The three frequency families for `l = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenFrequencies {
    shift: Vec<f64>,
    band_sine: Vec<f64>,
    band_cosine: Vec<f64>,
    /// `Some(l)` when `band_sine[m]` equals `shift[l]` (0-based indices).
    sine_partner: Vec<Option<usize>>,
    cosine_partner: Vec<Option<usize>>,
}

/// Index `l` (0-based) with `shift[l] = target_multiple * 2π/a`, if the
/// multiple is a whole number in `1..=modes`.
fn whole_index(multiple: f64, modes: usize) -> Option<usize> {
    let r = libm::round(multiple);
    if r >= 1.0 && r <= modes as f64 && libm::fabs(multiple - r) <= COLLISION_TOLERANCE * r {
        Some(r as usize - 1)
    } else {
        None
    }
}

pub fn eigenfrequencies(params: &ModelParams, modes: usize) -> Result<EigenFrequencies> {
    if modes == 0 {
        return Err(Error::Input("truncation order must be at least 1".into()));
    }
    let a = params.cost();
    let band = params.band_length();
    let shift = (1..=modes).map(|l| 2.0 * PI * l as f64 / a).collect();
    let band_sine = (1..=modes).map(|l| 2.0 * PI * l as f64 / band).collect();
    let band_cosine = (1..=modes)
        .map(|l| (2 * l - 1) as f64 * PI / band)
        .collect();
    // 2πm/(2L-a) = 2πl/a  ⟺  l = m·a/(2L-a)
    let sine_partner = (1..=modes)
        .map(|m| whole_index(m as f64 * a / band, modes))
        .collect();
    // (2m-1)π/(2L-a) = 2πl/a  ⟺  l = (2m-1)·a/(2(2L-a))
    let cosine_partner = (1..=modes)
        .map(|m| whole_index((2 * m - 1) as f64 * a / (2.0 * band), modes))
        .collect();
    Ok(EigenFrequencies {
        shift,
        band_sine,
        band_cosine,
        sine_partner,
        cosine_partner,
    })
}

impl EigenFrequencies {
    /// Truncation order `N`.
    pub fn modes(&self) -> usize {
        self.shift.len()
    }

    /// `2πl/a`.
    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    /// `2πl/(2L-a)`.
    pub fn band_sine(&self) -> &[f64] {
        &self.band_sine
    }

    /// `(2l-1)π/(2L-a)`.
    pub fn band_cosine(&self) -> &[f64] {
        &self.band_cosine
    }

    /// Whether band sine slot `m` (0-based) carries `x cos(ωx)`.
    pub fn sine_is_generalized(&self, m: usize) -> bool {
        self.sine_partner[m].is_some()
    }

    /// Whether band cosine slot `m` (0-based) carries `x sin(ωx)`.
    pub fn cosine_is_generalized(&self, m: usize) -> bool {
        self.cosine_partner[m].is_some()
    }

    /// Number of coinciding frequency pairs.
    pub fn collisions(&self) -> usize {
        self.sine_partner.iter().flatten().count() + self.cosine_partner.iter().flatten().count()
    }

    pub fn max_frequency(&self) -> f64 {
        self.shift
            .iter()
            .chain(&self.band_sine)
            .chain(&self.band_cosine)
            .fold(0.0, |m, w| m.max(*w))
    }

    /// Every basis function, in coefficient order.
    fn basis(&self) -> Vec<Mode> {
        let n = self.modes();
        let mut out = Vec::with_capacity(4 * n + 2);
        out.extend(self.shift.iter().map(|&w| Mode::Sine(w)));
        out.extend(self.shift.iter().map(|&w| Mode::Cosine(w)));
        out.extend((0..n).map(|m| {
            let w = self.band_sine[m];
            if self.sine_is_generalized(m) {
                Mode::XCosine(w)
            } else {
                Mode::Sine(w)
            }
        }));
        out.extend((0..n).map(|m| {
            let w = self.band_cosine[m];
            if self.cosine_is_generalized(m) {
                Mode::XSine(w)
            } else {
                Mode::Cosine(w)
            }
        }));
        out.push(Mode::Slope);
        out.push(Mode::Offset);
        out
    }
}

/// A single basis function and its exact evolution.
#[derive(Debug, Clone, Copy)]
enum Mode {
    Sine(f64),
    Cosine(f64),
    XCosine(f64),
    XSine(f64),
    Slope,
    Offset,
}

impl Mode {
    /// Contribution of a unit coefficient at `(x, t)`.
    fn evolve(&self, x: f64, t: f64) -> f64 {
        match *self {
            Mode::Sine(w) => libm::sin(w * x) * libm::exp(-w * w * t),
            Mode::Cosine(w) => libm::cos(w * x) * libm::exp(-w * w * t),
            Mode::XCosine(w) => {
                let (s, c) = libm::sincos(w * x);
                (x * c - 2.0 * w * t * s) * libm::exp(-w * w * t)
            }
            Mode::XSine(w) => {
                let (s, c) = libm::sincos(w * x);
                (x * s + 2.0 * w * t * c) * libm::exp(-w * w * t)
            }
            Mode::Slope => x,
            Mode::Offset => 1.0,
        }
    }
}

/// Returns `G(z) = cos(zL) - cos(z(L-a))` and `H(z) = sin(zL) - sin(z(L-a))`.
pub fn verify_dispersion(z: f64, params: &ModelParams) -> (f64, f64) {
    // sum-to-product form; the difference of the two cosines cancels badly
    // for large z
    let half_band = 0.5 * z * params.band_length();
    let half_cost = libm::sin(0.5 * z * params.cost());
    let g = -2.0 * libm::sin(half_band) * half_cost;
    let h = 2.0 * libm::cos(half_band) * half_cost;
    (g, h)
}

/// Largest dispersion residual over all frequencies, using `G` and `H` for
/// the shift family, `G` for band sines and `H` for band cosines.
pub fn max_dispersion_residual(freqs: &EigenFrequencies, params: &ModelParams) -> f64 {
    let mut worst = 0.0f64;
    for &w in freqs.shift() {
        let (g, h) = verify_dispersion(w, params);
        worst = worst.max(libm::fabs(g)).max(libm::fabs(h));
    }
    for &w in freqs.band_sine() {
        worst = worst.max(libm::fabs(verify_dispersion(w, params).0));
    }
    for &w in freqs.band_cosine() {
        worst = worst.max(libm::fabs(verify_dispersion(w, params).1));
    }
    worst
}

/// `γ_l = min(4π²l²/a², 4π²l²/(2L-a)², (2l-1)²π²/(2L-a)²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRates {
    pub rates: Vec<f64>,
}

pub fn decay_rates(params: &ModelParams, modes: usize) -> DecayRates {
    let a = params.cost();
    let band = params.band_length();
    let rates = (1..=modes)
        .map(|l| {
            let l = l as f64;
            let shift = 4.0 * PI * PI * l * l / (a * a);
            let band_sine = 4.0 * PI * PI * l * l / (band * band);
            let band_cosine = (2.0 * l - 1.0) * (2.0 * l - 1.0) * PI * PI / (band * band);
            shift.min(band_sine).min(band_cosine)
        })
        .collect();
    DecayRates { rates }
}

/// The two slowest distinct decay rates `ω²` over the whole spectrum.
pub fn slowest_rates(params: &ModelParams) -> (f64, f64) {
    let band = params.band_length();
    let a = params.cost();
    let mut candidates = [
        (PI / band) * (PI / band),
        (2.0 * PI / band) * (2.0 * PI / band),
        (3.0 * PI / band) * (3.0 * PI / band),
        (2.0 * PI / a) * (2.0 * PI / a),
    ];
    candidates.sort_by(|x, y| x.total_cmp(y));
    (candidates[0], candidates[1])
}

/// Coefficients of the truncated series, one vector per family.
///
/// `band_sine[m]` multiplies `x cos(ωx)` and `band_cosine[m]` multiplies
/// `x sin(ωx)` where [`EigenFrequencies`] flags a collision.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    pub shift_sine: Vec<f64>,
    pub shift_cosine: Vec<f64>,
    pub band_sine: Vec<f64>,
    pub band_cosine: Vec<f64>,
    pub slope: f64,
    pub offset: f64,
}

impl SpectralCoefficients {
    pub fn zeros(modes: usize) -> Self {
        Self {
            shift_sine: vec![0.0; modes],
            shift_cosine: vec![0.0; modes],
            band_sine: vec![0.0; modes],
            band_cosine: vec![0.0; modes],
            slope: 0.0,
            offset: 0.0,
        }
    }

    pub fn modes(&self) -> usize {
        self.shift_sine.len()
    }

    fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(4 * self.modes() + 2);
        v.extend_from_slice(&self.shift_sine);
        v.extend_from_slice(&self.shift_cosine);
        v.extend_from_slice(&self.band_sine);
        v.extend_from_slice(&self.band_cosine);
        v.push(self.slope);
        v.push(self.offset);
        v
    }

    fn from_flat(modes: usize, v: &[f64]) -> Self {
        let part = |k: usize| v[k * modes..(k + 1) * modes].to_vec();
        Self {
            shift_sine: part(0),
            shift_cosine: part(1),
            band_sine: part(2),
            band_cosine: part(3),
            slope: v[4 * modes],
            offset: v[4 * modes + 1],
        }
    }

    /// `(family, l, value)` rows with `l` starting at 1; the stationary
    /// pair is reported as `slope` and `offset` with `l = 0`.
    pub fn rows(&self) -> Vec<(&'static str, usize, f64)> {
        let mut out = Vec::with_capacity(4 * self.modes() + 2);
        for (name, values) in [
            ("shift_sine", &self.shift_sine),
            ("shift_cosine", &self.shift_cosine),
            ("band_sine", &self.band_sine),
            ("band_cosine", &self.band_cosine),
        ] {
            out.extend(values.iter().enumerate().map(|(i, v)| (name, i + 1, *v)));
        }
        out.push(("slope", 0, self.slope));
        out.push(("offset", 0, self.offset));
        out
    }
}

/// Value of the series at `(x, t)`.
pub fn evaluate(coeffs: &SpectralCoefficients, freqs: &EigenFrequencies, x: f64, t: f64) -> f64 {
    freqs
        .basis()
        .iter()
        .zip(coeffs.flat())
        .filter(|(_, c)| *c != 0.0)
        .map(|(m, c)| c * m.evolve(x, t))
        .sum()
}

/// [`evaluate`] at every node of `grid`.
pub fn evaluate_profile(
    coeffs: &SpectralCoefficients,
    freqs: &EigenFrequencies,
    grid: &Grid,
    t: f64,
) -> SampledProfile {
    let basis = freqs.basis();
    let flat = coeffs.flat();
    let active: Vec<(Mode, f64)> = basis
        .into_iter()
        .zip(flat)
        .filter(|(_, c)| *c != 0.0)
        .collect();
    SampledProfile::from_fn(*grid, |x| active.iter().map(|(m, c)| c * m.evolve(x, t)).sum())
}

/// The affine part `A_0 x + B_0`, which is the limit as `t → ∞`.
pub fn steady_part(coeffs: &SpectralCoefficients) -> (f64, f64) {
    (coeffs.slope, coeffs.offset)
}

/// Conditioning and frame-bound estimates of a projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionDiagnostics {
    /// Extreme eigenvalues of the Gram matrix of the unit-normalized basis.
    pub gram_min_eigenvalue: f64,
    pub gram_max_eigenvalue: f64,
    pub collisions: usize,
    pub nodes_per_period: f64,
}

impl ProjectionDiagnostics {
    pub fn condition(&self) -> f64 {
        self.gram_max_eigenvalue / self.gram_min_eigenvalue
    }

    /// `(c_1, c_2)` with `c_1 ‖F‖² ≤ Σ ĉ² ≤ c_2 ‖F‖²` for coefficients `ĉ`
    /// of the unit-normalized basis.
    pub fn frame_bounds(&self) -> (f64, f64) {
        (1.0 / self.gram_max_eigenvalue, 1.0 / self.gram_min_eigenvalue)
    }
}

/// Result of projecting an initial heat profile onto the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub frequencies: EigenFrequencies,
    pub coefficients: SpectralCoefficients,
    /// `‖F_I - series(0)‖ / ‖F_I‖` in the discrete L² norm.
    pub residual: f64,
    /// `Σ (c_i ‖φ_i‖)²`, the coefficient energy in the normalized basis.
    pub normalized_energy: f64,
    pub diagnostics: ProjectionDiagnostics,
}

impl Projection {
    pub fn value_at(&self, x: f64, t: f64) -> f64 {
        evaluate(&self.coefficients, &self.frequencies, x, t)
    }

    pub fn profile_at(&self, grid: &Grid, t: f64) -> SampledProfile {
        evaluate_profile(&self.coefficients, &self.frequencies, grid, t)
    }
}

/// Affine function with the same strip integrals over `[-L, -L+a]` and
/// `[L-a, L]` as `profile`. Those integrals are invariant under the
/// evolution and vanish on every decaying mode, so they pin `A_0, B_0`.
pub fn affine_from_strips(profile: &SampledProfile, params: &ModelParams) -> Result<(f64, f64)> {
    let (left, right) = strip_integrals(profile, params)?;
    let a = params.cost();
    let slope = (right - left) / (a * params.band_length());
    let offset = (left + right) / (2.0 * a);
    Ok((slope, offset))
}

/// Projects `F_I` onto the truncated basis.
///
/// The affine part is fixed by the conserved strip integrals; the
/// oscillatory coefficients are the least-squares fit of the remainder,
/// obtained from the Gram matrix of the non-orthogonal basis under
/// composite Simpson quadrature.
pub fn project(initial: &SampledProfile, params: &ModelParams, modes: usize) -> Result<Projection> {
    let grid = *initial.grid();
    check_grid(&grid, params)?;
    let frequencies = eigenfrequencies(params, modes)?;
    let period = 2.0 * PI / frequencies.max_frequency();
    let nodes_per_period = period / grid.step();
    if nodes_per_period < MIN_NODES_PER_PERIOD {
        return Err(Error::Grid(format!(
            "under-resolved: {nodes_per_period:.2} nodes per shortest period with N = {modes} \
             (need at least {MIN_NODES_PER_PERIOD}); refine the grid or lower N"
        )));
    }

    let basis = frequencies.basis();
    let size = basis.len();
    let osc = size - 2;
    let weights = simpson_weights(grid.cells(), grid.step());
    let nodes: Vec<f64> = grid.nodes().collect();

    // Unit-normalized basis samples with the square-root weights folded in.
    let sqrt_w: Vec<f64> = weights.iter().map(|w| libm::sqrt(*w)).collect();
    let mut norms = vec![0.0; size];
    let mut samples = DMatrix::<f64>::zeros(nodes.len(), size);
    for (j, mode) in basis.iter().enumerate() {
        let mut col = samples.column_mut(j);
        for (k, &x) in nodes.iter().enumerate() {
            col[k] = sqrt_w[k] * mode.evolve(x, 0.0);
        }
        let norm = col.norm();
        if !(norm > 0.0) {
            return Err(Error::Grid(format!("basis function {j} vanishes on the grid")));
        }
        col /= norm;
        norms[j] = norm;
    }
    let gram = samples.tr_mul(&samples);

    let eig = gram.clone().symmetric_eigenvalues();
    let min = eig.min();
    let max = eig.max();
    let diagnostics = ProjectionDiagnostics {
        gram_min_eigenvalue: min,
        gram_max_eigenvalue: max,
        collisions: frequencies.collisions(),
        nodes_per_period,
    };
    if !(min > 0.0) || max / min > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            condition: if min > 0.0 { max / min } else { f64::INFINITY },
            limit: CONDITION_LIMIT,
        });
    }

    let (slope, offset) = affine_from_strips(initial, params)?;
    let remainder =
        DVector::from_iterator(nodes.len(), nodes.iter().zip(initial.values()).zip(&sqrt_w).map(
            |((x, v), s)| s * (v - (slope * x + offset)),
        ));
    let osc_samples = samples.columns(0, osc);
    let rhs = osc_samples.tr_mul(&remainder);
    let osc_gram = gram.view((0, 0), (osc, osc)).into_owned();
    let chol = osc_gram.cholesky().ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
        limit: CONDITION_LIMIT,
    })?;
    let normalized = chol.solve(&rhs);

    let mut flat = vec![0.0; size];
    let mut energy = 0.0;
    for j in 0..osc {
        flat[j] = normalized[j] / norms[j];
        energy += normalized[j] * normalized[j];
    }
    flat[osc] = slope;
    flat[osc + 1] = offset;
    energy += (slope * norms[osc]) * (slope * norms[osc]) + (offset * norms[osc + 1]) * (offset * norms[osc + 1]);
    let coefficients = SpectralCoefficients::from_flat(modes, &flat);

    let fitted = evaluate_profile(&coefficients, &frequencies, &grid, 0.0);
    let diff: Vec<f64> = fitted
        .values()
        .iter()
        .zip(initial.values())
        .map(|(a, b)| a - b)
        .collect();
    let reference = weighted_norm(&weights, initial.values());
    let residual = if reference > 0.0 {
        weighted_norm(&weights, &diff) / reference
    } else {
        weighted_norm(&weights, &diff)
    };

    Ok(Projection {
        frequencies,
        coefficients,
        residual,
        normalized_energy: energy,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(1.0, 0.5, 0.0).unwrap()
    }

    #[test]
    fn first_frequencies() {
        let f = eigenfrequencies(&params(), 2).unwrap();
        assert!((f.shift()[0] - 4.0 * PI).abs() < 1e-14);
        assert!((f.band_sine()[0] - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((f.band_cosine()[0] - 2.0 * PI / 3.0).abs() < 1e-14);
        assert!((f.band_cosine()[1] - 2.0 * PI).abs() < 1e-14);
        assert!(eigenfrequencies(&params(), 0).is_err());
    }

    #[test]
    fn family_ratio() {
        let p = ModelParams::new(1.3, 0.37, 0.1).unwrap();
        let f = eigenfrequencies(&p, 16).unwrap();
        for l in 0..16 {
            let r = f.shift()[l] / f.band_sine()[l];
            assert!((r - p.band_length() / p.cost()).abs() < 1e-12);
        }
    }

    #[test]
    fn collisions_detected() {
        // a/(2L-a) = 1/3: band sine 3l coincides with shift l
        let f = eigenfrequencies(&params(), 9).unwrap();
        let flagged: Vec<usize> = (0..9).filter(|&m| f.sine_is_generalized(m)).collect();
        assert_eq!(flagged, vec![2, 5, 8]);
        assert!((0..9).all(|m| !f.cosine_is_generalized(m)));
        // a = 0.8, L = 1: both families collide
        let p = ModelParams::new(1.0, 0.8, 0.0).unwrap();
        let f = eigenfrequencies(&p, 6).unwrap();
        assert!(f.sine_is_generalized(2));
        assert!(f.cosine_is_generalized(1));
        assert_eq!(f.band_cosine()[1], 3.0 * PI / 1.2);
        // irrational-looking ratio: none
        let p = ModelParams::new(1.0, 0.4142, 0.0).unwrap();
        assert_eq!(eigenfrequencies(&p, 32).unwrap().collisions(), 0);
    }

    #[test]
    fn dispersion_examples() {
        let p = params();
        let (g, h) = verify_dispersion(2.0 * PI * 3.0 / 0.5, &p);
        assert!(g.abs() < 1e-12 && h.abs() < 1e-12);
        assert_eq!(verify_dispersion(0.0, &p), (0.0, 0.0));
        let (g, h) = verify_dispersion(PI / 1.5, &p);
        assert!(h.abs() < 1e-15);
        assert!((g + 1.0).abs() < 1e-15);
    }

    #[test]
    fn generalized_modes_satisfy_the_boundary_coupling() {
        // x cos(zx) at a double zero of G: derivative at L equals that at L-a
        let p = params();
        let z = 4.0 * PI;
        let d = |x: f64| libm::cos(z * x) - z * x * libm::sin(z * x);
        assert!((d(1.0) - d(0.5)).abs() < 1e-12);
        assert!((d(-1.0) - d(-0.5)).abs() < 1e-12);
        // x sin(zx) at a double zero of H (a = 0.8: z = 2π/0.8·1 = 3π/1.2)
        let z = 2.0 * PI / 0.8;
        let d = |x: f64| libm::sin(z * x) + z * x * libm::cos(z * x);
        assert!((d(1.0) - d(0.2)).abs() < 1e-12);
        let _ = p;
    }

    #[test]
    fn generalized_mode_solves_the_heat_equation() {
        // finite differences in (x, t) of the evolved generalized modes
        for mode in [Mode::XCosine(4.0 * PI), Mode::XSine(2.5 * PI)] {
            let (x, t) = (0.3, 0.01);
            let (dx, dt) = (1e-4, 1e-7);
            let u_t = (mode.evolve(x, t + dt) - mode.evolve(x, t - dt)) / (2.0 * dt);
            let u_xx = (mode.evolve(x + dx, t) - 2.0 * mode.evolve(x, t) + mode.evolve(x - dx, t))
                / (dx * dx);
            assert!((u_t - u_xx).abs() < 1e-4 * u_xx.abs().max(1.0), "{u_t} vs {u_xx}");
        }
    }

    #[test]
    fn decay_rate_examples() {
        let r = decay_rates(&params(), 4);
        assert!((r.rates[0] - PI * PI / 2.25).abs() < 1e-12);
        assert!((r.rates[0] - 4.3865).abs() < 1e-4);
        for w in r.rates.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let (slowest, next) = slowest_rates(&params());
        assert_eq!(slowest, (PI / 1.5) * (PI / 1.5));
        assert!((next - 4.0 * slowest).abs() < 1e-12);
    }

    #[test]
    fn evaluate_examples() {
        let f = eigenfrequencies(&params(), 3).unwrap();
        let mut c = SpectralCoefficients::zeros(3);
        c.slope = 3.0;
        c.offset = 2.0;
        for t in [0.0, 0.5, 10.0] {
            assert!((evaluate(&c, &f, 0.4, t) - 3.2).abs() < 1e-15);
        }
        assert_eq!(steady_part(&c), (3.0, 2.0));

        let mut c = SpectralCoefficients::zeros(3);
        c.band_sine[0] = 1.0;
        assert_eq!(evaluate(&c, &f, 0.0, 0.7), 0.0);
        let w = f.band_sine()[0];
        let t = 1.0 / (w * w);
        let x = 0.37;
        let expect = libm::sin(w * x) * libm::exp(-1.0);
        assert!((evaluate(&c, &f, x, t) - expect).abs() < 1e-15);
    }

    fn fine_grid() -> Grid {
        Grid::new(1.0, 2400).unwrap()
    }

    #[test]
    fn affine_datum_projects_exactly() {
        let f = SampledProfile::from_fn(fine_grid(), |x| 3.0 * x + 2.0);
        let p = project(&f, &params(), 64).unwrap();
        assert!((p.coefficients.slope - 3.0).abs() < 1e-10);
        assert!((p.coefficients.offset - 2.0).abs() < 1e-10);
        let c = &p.coefficients;
        for v in c.shift_sine.iter().chain(&c.shift_cosine).chain(&c.band_sine).chain(&c.band_cosine) {
            assert!(v.abs() < 1e-10);
        }
        assert!(p.residual < 1e-12);
    }

    #[test]
    fn basis_element_projects_exactly() {
        let w = 4.0 * PI / 3.0;
        let f = SampledProfile::from_fn(fine_grid(), |x| libm::sin(w * x));
        let p = project(&f, &params(), 64).unwrap();
        let c = &p.coefficients;
        assert!((c.band_sine[0] - 1.0).abs() < 1e-10);
        let mut others = c.flat();
        others[2 * 64] = 0.0;
        assert!(others.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn gram_is_well_conditioned_with_generalized_modes() {
        let f = SampledProfile::from_fn(fine_grid(), |x| -x);
        let p = project(&f, &params(), 64).unwrap();
        assert_eq!(p.diagnostics.collisions, 21);
        assert!(p.diagnostics.condition() < 100.0);
    }

    #[test]
    fn under_resolved_grid_rejected() {
        let f = SampledProfile::from_fn(Grid::new(1.0, 400).unwrap(), |x| -x);
        assert!(matches!(project(&f, &params(), 64), Err(Error::Grid(_))));
        assert!(project(&f, &params(), 12).is_ok());
    }
}
