//! Separable exact solution of the one-dimensional p-Laplace equation.
//!
//! `u(x, t) = (B p / (p - 1))^(p - 1) t + B |x|^(p / (p - 1))` has flux
//! `|u_x|^(p-2) u_x = (B p / (p - 1))^(p - 1) x`, so `u_t = (|u_x|^(p-2) u_x)_x`.

use crate::error::{Error, Result};
use crate::grid::{Grid, SpaceTimeField};

/// The time slope `(B p / (p - 1))^(p - 1)`.
pub fn power_rate(b: f64, p: f64) -> f64 {
    (b * p / (p - 1.0)).powf(p - 1.0)
}

/// Value at `(x, t)` with the time origin moved to `t_origin`.
pub fn exact_power_value(b: f64, p: f64, x: f64, t: f64, t_origin: f64) -> f64 {
    power_rate(b, p) * (t - t_origin) + b * x.abs().powf(p / (p - 1.0))
}

/// Samples the exact solution on a 1D grid, shifted in time so it vanishes
/// at `(0, t_start)` and is non-negative everywhere on the grid.
pub fn exact_power(b: f64, p: f64, grid: &Grid) -> Result<SpaceTimeField> {
    if grid.dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            found: grid.dim(),
        });
    }
    if !(p > 1.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need p > 1 and B > 0, got p = {p}, B = {b}"
        )));
    }
    let t0 = grid.t_start();
    SpaceTimeField::from_fn(*grid, |x, t| exact_power_value(b, p, x[0], t, t0))
}
