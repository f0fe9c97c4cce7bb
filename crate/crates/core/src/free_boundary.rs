//! Tracking the zero level set of the heat variable, the transaction rate,
//! and the global-existence classification.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::SampledProfile;
use crate::model::ModelParams;

/// The zero of a profile with a single sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCrossing {
    pub location: f64,
    /// Last nonzero node before and first nonzero node after the change.
    pub bracket: (usize, usize),
    /// Set when the profile vanishes on a plateau of two or more nodes.
    pub degenerate: bool,
}

/// Sign-change brackets found by scanning the nodes, skipping exact zeros.
fn brackets(values: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        if let Some(j) = last {
            if (values[j] > 0.0) != (v > 0.0) {
                out.push((j, i));
            }
        }
        last = Some(i);
    }
    out
}

fn root_in(profile: &SampledProfile, (lo, hi): (usize, usize)) -> (f64, bool) {
    let grid = profile.grid();
    let v = profile.values();
    match hi - lo {
        1 => {
            let (a, b) = (v[lo], v[hi]);
            (grid.node(lo) + grid.step() * a / (a - b), false)
        }
        2 => (grid.node(lo + 1), false),
        _ => (0.5 * (grid.node(lo + 1) + grid.node(hi - 1)), true),
    }
}

/// Finds the unique zero of `F` by node scan and linear interpolation.
pub fn locate_zero(profile: &SampledProfile) -> Result<ZeroCrossing> {
    let found = brackets(profile.values());
    match found.as_slice() {
        [] => Err(Error::NoSignChange),
        [bracket] => {
            let (location, degenerate) = root_in(profile, *bracket);
            Ok(ZeroCrossing {
                location,
                bracket: *bracket,
                degenerate,
            })
        }
        many => Err(Error::MultipleZeros {
            brackets: many.iter().map(|b| root_in(profile, *b).0).collect(),
        }),
    }
}

/// Where the free boundary sits relative to the band `(-L+a, L-a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandStatus {
    /// Strictly inside the band, more than `h/2` from either end.
    Interior,
    /// Within `h/2` of an end of the band.
    InCollar,
    /// Outside the band by more than `h/2`.
    Exited,
}

impl BandStatus {
    pub fn classify(price: f64, params: &ModelParams, step: f64) -> Self {
        let (lo, hi) = params.price_band();
        let slack = 0.5 * step;
        if price < lo - slack || price > hi + slack {
            BandStatus::Exited
        } else if price <= lo + slack || price >= hi - slack {
            BandStatus::InCollar
        } else {
            BandStatus::Interior
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BandStatus::Interior => "interior",
            BandStatus::InCollar => "in-collar",
            BandStatus::Exited => "exited",
        }
    }
}

/// One sample of the free boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub time: f64,
    pub price: f64,
    pub status: BandStatus,
    pub degenerate: bool,
}

/// Free boundary `p(t)` at increasing sample times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FreeBoundaryPath {
    points: Vec<PathPoint>,
}

impl FreeBoundaryPath {
    pub fn points(&self) -> &[PathPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&PathPoint> {
        self.points.last()
    }

    /// Linear interpolation between samples, for reporting only.
    pub fn price_at(&self, time: f64) -> Option<f64> {
        let pts = &self.points;
        let first = pts.first()?;
        if time <= first.time {
            return Some(first.price);
        }
        for w in pts.windows(2) {
            if time <= w[1].time {
                let s = (time - w[0].time) / (w[1].time - w[0].time);
                return Some(w[0].price + s * (w[1].price - w[0].price));
            }
        }
        pts.last().map(|p| p.price)
    }
}

/// Locates the zero at every sample time and classifies it.
pub fn track(profiles: &[(f64, SampledProfile)], params: &ModelParams) -> Result<FreeBoundaryPath> {
    let mut points = Vec::with_capacity(profiles.len());
    let mut previous: Option<f64> = None;
    for (time, profile) in profiles {
        if let Some(prev) = previous {
            if !(*time > prev) {
                return Err(Error::Input(format!(
                    "sample times must increase ({prev} then {time})"
                )));
            }
        }
        previous = Some(*time);
        let zero = locate_zero(profile).map_err(|e| annotate(e, *time))?;
        points.push(PathPoint {
            time: *time,
            price: zero.location,
            status: BandStatus::classify(zero.location, params, profile.grid().step()),
            degenerate: zero.degenerate,
        });
    }
    Ok(FreeBoundaryPath { points })
}

fn annotate(err: Error, time: f64) -> Error {
    match err {
        Error::NoSignChange => Error::Input(format!("t = {time}: profile has no sign change")),
        Error::MultipleZeros { brackets } => Error::Input(format!(
            "t = {time}: {} sign changes near x = {brackets:?}",
            brackets.len()
        )),
        other => other,
    }
}

/// `λ = -f_x(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransactionRate {
    pub value: f64,
    /// Set when the density is flat around `p`.
    pub degenerate: bool,
}

/// Negated derivative of `f` at `p`: central differences at the two nodes
/// bracketing `p`, linearly interpolated to `p`.
pub fn compute_lambda(density: &SampledProfile, price: f64) -> Result<TransactionRate> {
    let grid = density.grid();
    let h = grid.step();
    let l = grid.half_width();
    if !(price - (-l) >= h && l - price >= h) {
        return Err(Error::Boundary { p: price });
    }
    let v = density.values();
    let central = |i: usize| (v[i + 1] - v[i - 1]) / (2.0 * h);
    let (i, theta) = grid.locate(price);
    let (left, right) = if theta == 0.0 {
        (central(i), 0.0)
    } else {
        (central(i), central(i + 1))
    };
    let slope = (1.0 - theta) * left + theta * right;
    Ok(TransactionRate {
        value: -slope,
        degenerate: left == 0.0 && right == 0.0,
    })
}

/// Outcome of the global-existence check over the sampled horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GlobalExistence {
    /// Every sample was interior; only sampled times are certified.
    MassConservingGlobal { horizon: f64 },
    /// First sample at which the price left the open band.
    BreakdownAt { time: f64, index: usize },
}

pub fn classify_global_existence(path: &FreeBoundaryPath) -> GlobalExistence {
    path.points
        .iter()
        .enumerate()
        .find(|(_, p)| p.status != BandStatus::Interior)
        .map(|(index, p)| GlobalExistence::BreakdownAt {
            time: p.time,
            index,
        })
        .unwrap_or(GlobalExistence::MassConservingGlobal {
            horizon: path.last().map(|p| p.time).unwrap_or(0.0),
        })
}
