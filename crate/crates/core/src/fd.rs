//! Finite-difference solver for the heat problem, used as an independent
//! check on the series solution.
//!
//! The boundary coupling `F_x(±L) = F_x(±(L-a))` is imposed through ghost
//! nodes: the one-sided derivative at the wall is replaced by the central
//! difference at the coupled interior node, giving the end rows
//!
//! ```text
//! (2F_1 - 2F_0 - (F_{k+1} - F_{k-1})) / h²
//! (2F_{n-1} - 2F_n + (F_{n-k+1} - F_{n-k-1})) / h²
//! ```
//!
//! with `k = a/h`. With these rows the trapezoid integrals over the two
//! strips of width `a` next to the walls are exact discrete invariants and
//! affine profiles are stationary. The operator is tridiagonal plus a rank
//! two correction, so each implicit step costs two tridiagonal sweeps.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::SampledProfile;
use crate::model::{check_grid, ModelParams};
use crate::quadrature::trapezoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    CrankNicolson,
    ImplicitEuler,
}

impl Scheme {
    fn theta(self) -> f64 {
        match self {
            Scheme::CrankNicolson => 0.5,
            Scheme::ImplicitEuler => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdWarning {
    /// Crank–Nicolson with `dt > h` may ring on rough data.
    LargeStep { dt: f64, step: f64 },
    /// A requested sample time was moved to the nearest time level.
    SnappedTime { requested: f64, actual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub times: Vec<f64>,
    pub profiles: Vec<SampledProfile>,
    /// Time step actually used, `horizon / steps`.
    pub dt: f64,
    pub warnings: Vec<FdWarning>,
}

/// Trapezoid integrals of `profile` over `[-L, -L+a]` and `[L-a, L]`.
pub fn strip_integrals(profile: &SampledProfile, params: &ModelParams) -> Result<(f64, f64)> {
    let grid = profile.grid();
    let k = check_grid(grid, params)?;
    let v = profile.values();
    let n = grid.cells();
    let h = grid.step();
    Ok((trapezoid(&v[..=k], h), trapezoid(&v[n - k..], h)))
}

/// A priori bound on `sup |F|` over all time: the gradient bound
/// `M = max |F_x(·, 0)|` together with the conserved left strip integral
/// controls `|F(-L, t)| ≤ (|S_l| + M a²/2) / a`, and integrating the
/// gradient across `[-L, L]` adds at most `2L M`.
pub fn uniform_bound(initial: &SampledProfile, params: &ModelParams) -> Result<f64> {
    let (left, _) = strip_integrals(initial, params)?;
    let m = initial.max_abs_gradient();
    let a = params.cost();
    Ok((libm::fabs(left) + 0.5 * m * a * a) / a + 2.0 * params.max_price() * m)
}

/// Thomas factorization of a tridiagonal matrix.
struct Tridiagonal {
    lower: Vec<f64>,
    /// Modified upper diagonal `c'_i`.
    upper: Vec<f64>,
    /// Pivots `b_i - a_i c'_{i-1}`.
    pivot: Vec<f64>,
}

impl Tridiagonal {
    fn factor(lower: Vec<f64>, diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut up = vec![0.0; n];
        let mut pivot = vec![0.0; n];
        for i in 0..n {
            let p = if i == 0 {
                diag[0]
            } else {
                diag[i] - lower[i] * up[i - 1]
            };
            if p.abs() < f64::EPSILON * diag[i].abs().max(1.0) {
                return Err(Error::SingularSystem("zero pivot in tridiagonal factorization".into()));
            }
            pivot[i] = p;
            up[i] = if i + 1 < n { upper[i] / p } else { 0.0 };
        }
        Ok(Self {
            lower,
            upper: up,
            pivot,
        })
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        x[0] /= self.pivot[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i] * x[i - 1]) / self.pivot[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.upper[i] * x[i + 1];
        }
    }
}

/// The discrete operator `A` for a grid with `n` cells, step `h` and shift
/// `k` nodes.
struct Operator {
    n: usize,
    k: usize,
    inv_h2: f64,
}

impl Operator {
    fn apply(&self, f: &[f64], out: &mut [f64]) {
        let (n, k, c) = (self.n, self.k, self.inv_h2);
        out[0] = c * (2.0 * f[1] - 2.0 * f[0] - (f[k + 1] - f[k - 1]));
        for i in 1..n {
            out[i] = c * (f[i - 1] - 2.0 * f[i] + f[i + 1]);
        }
        out[n] = c * (2.0 * f[n - 1] - 2.0 * f[n] + (f[n - k + 1] - f[n - k - 1]));
    }

    /// `v_0 · y` and `v_n · y`, the rank-two part of the end rows.
    fn correction(&self, y: &[f64]) -> [f64; 2] {
        let (n, k, c) = (self.n, self.k, self.inv_h2);
        [c * (y[k - 1] - y[k + 1]), c * (y[n - k + 1] - y[n - k - 1])]
    }
}

/// Solver for `(I - θ dt A) x = b` by the Woodbury identity.
struct StepSolver {
    tri: Tridiagonal,
    /// `T⁻¹ e_0` and `T⁻¹ e_n`.
    z: [Vec<f64>; 2],
    /// Inverse of the 2×2 capacitance matrix `I - θ dt Vᵀ T⁻¹ U`.
    cap_inv: [[f64; 2]; 2],
    scale: f64,
}

impl StepSolver {
    fn new(op: &Operator, theta_dt: f64) -> Result<Self> {
        let n = op.n;
        let s = theta_dt * op.inv_h2;
        let mut lower = vec![-s; n + 1];
        let mut upper = vec![-s; n + 1];
        let diag = vec![1.0 + 2.0 * s; n + 1];
        lower[0] = 0.0;
        upper[0] = -2.0 * s;
        lower[n] = -2.0 * s;
        upper[n] = 0.0;
        let tri = Tridiagonal::factor(lower, &diag, &upper)?;

        let mut z0 = vec![0.0; n + 1];
        z0[0] = 1.0;
        tri.solve_in_place(&mut z0);
        let mut zn = vec![0.0; n + 1];
        zn[n] = 1.0;
        tri.solve_in_place(&mut zn);

        // M = T - θ dt U Vᵀ, capacitance I - θ dt Vᵀ Z
        let c0 = op.correction(&z0);
        let cn = op.correction(&zn);
        let m = [
            [1.0 - theta_dt * c0[0], -theta_dt * cn[0]],
            [-theta_dt * c0[1], 1.0 - theta_dt * cn[1]],
        ];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-14 {
            return Err(Error::SingularSystem("singular boundary capacitance".into()));
        }
        let cap_inv = [
            [m[1][1] / det, -m[0][1] / det],
            [-m[1][0] / det, m[0][0] / det],
        ];
        Ok(Self {
            tri,
            z: [z0, zn],
            cap_inv,
            scale: theta_dt,
        })
    }

    fn solve_in_place(&self, op: &Operator, x: &mut [f64]) {
        self.tri.solve_in_place(x);
        let r = op.correction(x);
        let w0 = self.scale * (self.cap_inv[0][0] * r[0] + self.cap_inv[0][1] * r[1]);
        let w1 = self.scale * (self.cap_inv[1][0] * r[0] + self.cap_inv[1][1] * r[1]);
        for (i, v) in x.iter_mut().enumerate() {
            *v += self.z[0][i] * w0 + self.z[1][i] * w1;
        }
    }
}

/// Integrates `F_t = F_xx` from `initial` up to `config.horizon` and
/// returns the profiles at the time levels nearest to `sample_times`.
pub fn solve_heat_fd(
    initial: &SampledProfile,
    params: &ModelParams,
    config: &FdConfig,
    sample_times: &[f64],
) -> Result<FdSolution> {
    let grid = *initial.grid();
    let k = check_grid(&grid, params)?;
    if !(config.dt > 0.0 && config.dt.is_finite()) {
        return Err(Error::Input("time step must be positive".into()));
    }
    if !(config.horizon >= 0.0 && config.horizon.is_finite()) {
        return Err(Error::Input("horizon must be non-negative".into()));
    }
    if let Some(t) = sample_times
        .iter()
        .find(|t| !(**t >= 0.0 && **t <= config.horizon * (1.0 + 1e-12)))
    {
        return Err(Error::Input(alloc::format!(
            "sample time {t} outside [0, {}]",
            config.horizon
        )));
    }

    let h = grid.step();
    let mut warnings = Vec::new();
    if config.scheme == Scheme::CrankNicolson && config.dt > h {
        warnings.push(FdWarning::LargeStep { dt: config.dt, step: h });
    }
    let steps = libm::ceil(config.horizon / config.dt - 1e-9).max(0.0) as usize;
    let dt = if steps == 0 { config.dt } else { config.horizon / steps as f64 };

    // sample index per requested time, in request order
    let mut wanted: Vec<(usize, usize)> = sample_times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let level = (libm::round(t / dt) as usize).min(steps);
            let actual = level as f64 * dt;
            if libm::fabs(actual - t) > 1e-9 * t.max(1.0) {
                warnings.push(FdWarning::SnappedTime { requested: t, actual });
            }
            (level, j)
        })
        .collect();
    wanted.sort_unstable();

    let op = Operator {
        n: grid.cells(),
        k,
        inv_h2: 1.0 / (h * h),
    };
    let theta = config.scheme.theta();
    let solver = StepSolver::new(&op, theta * dt)?;

    let mut times = vec![0.0; sample_times.len()];
    let mut profiles: Vec<Option<SampledProfile>> = vec![None; sample_times.len()];
    let mut f = initial.values().to_vec();
    let mut af = vec![0.0; f.len()];
    let mut next = 0;
    for level in 0..=steps {
        while next < wanted.len() && wanted[next].0 == level {
            let j = wanted[next].1;
            times[j] = level as f64 * dt;
            profiles[j] = Some(SampledProfile::new(grid, f.clone())?);
            next += 1;
        }
        if next == wanted.len() || level == steps {
            break;
        }
        if theta < 1.0 {
            op.apply(&f, &mut af);
            let explicit = (1.0 - theta) * dt;
            for (v, d) in f.iter_mut().zip(&af) {
                *v += explicit * d;
            }
        }
        solver.solve_in_place(&op, &mut f);
    }

    Ok(FdSolution {
        times,
        profiles: profiles.into_iter().map(|p| p.expect("every sample filled")).collect(),
        dt,
        warnings,
    })
}
