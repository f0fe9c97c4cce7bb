//! Composite quadrature on uniform node sets.

use alloc::vec;
use alloc::vec::Vec;

/// Composite trapezoid rule over `values` sampled with spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        len => {
            let interior: f64 = values[1..len - 1].iter().sum();
            h * (0.5 * (values[0] + values[len - 1]) + interior)
        }
    }
}

/// Composite Simpson weights for `cells` uniform cells of width `h`.
///
/// An odd cell count closes with Simpson's 3/8 rule on the last three
/// cells; a single cell falls back to the trapezoid rule.
pub fn simpson_weights(cells: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; cells + 1];
    match cells {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let even_part = if cells.is_multiple_of(2) { cells } else { cells - 3 };
            for start in (0..even_part).step_by(2) {
                w[start] += h / 3.0;
                w[start + 1] += 4.0 * h / 3.0;
                w[start + 2] += h / 3.0;
            }
            if even_part < cells {
                let s = even_part;
                let c = 3.0 * h / 8.0;
                w[s] += c;
                w[s + 1] += 3.0 * c;
                w[s + 2] += 3.0 * c;
                w[s + 3] += c;
            }
        }
    }
    w
}

/// Weighted inner product `sum w_i u_i v_i`.
pub fn weighted_dot(weights: &[f64], u: &[f64], v: &[f64]) -> f64 {
    weights
        .iter()
        .zip(u.iter().zip(v))
        .map(|(w, (a, b))| w * a * b)
        .sum()
}

/// Discrete L² norm with the given quadrature weights.
pub fn weighted_norm(weights: &[f64], u: &[f64]) -> f64 {
    libm::sqrt(weighted_dot(weights, u, u))
}
