//! Seeded random fields for property checks and constant fitting.
//!
//! Generators take any [`Rng`]; callers in this workspace use
//! `ChaCha8Rng::seed_from_u64` so runs replay bit for bit.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::Result;
use crate::grid::{Grid, SpaceTimeField};

/// Smooth field vanishing on the lateral boundary: a short random sine
/// series in space modulated by a random slow oscillation in time.
///
/// The modes are fixed in physical units, so the same draw sampled on a
/// refined grid approximates the same continuum function.
pub fn smooth_zero_boundary<R: Rng>(grid: &Grid, rng: &mut R, modes: usize) -> Result<SpaceTimeField> {
    let l = grid.extent();
    let span = grid.t_end() - grid.t_start();
    let terms: Vec<(f64, [f64; 2], f64, f64, f64)> = (0..modes.max(1))
        .map(|_| {
            let a = rng.gen_range(-1.0..1.0);
            let k = [rng.gen_range(1..=4) as f64, rng.gen_range(1..=4) as f64];
            let b = rng.gen_range(0.0..0.9);
            let omega = rng.gen_range(0.5..3.0) * PI / span;
            let phase = rng.gen_range(0.0..2.0 * PI);
            (a, k, b, omega, phase)
        })
        .collect();
    let dim = grid.dim();
    SpaceTimeField::from_fn(*grid, |x, t| {
        let mut v = 0.0;
        for &(a, k, b, omega, phase) in &terms {
            let mut s = (k[0] * PI * (x[0] + l) / (2.0 * l)).sin();
            if dim == 2 {
                s *= (k[1] * PI * (x[1] + l) / (2.0 * l)).sin();
            }
            v += a * s * (1.0 + b * (omega * t + phase).cos());
        }
        v
    })
    .map(pin_boundary)
}

// sin(k pi) is ~1e-16, not zero; snap the lateral boundary to exact zeros
fn pin_boundary(f: SpaceTimeField) -> SpaceTimeField {
    let grid = *f.grid();
    let n_space = grid.n_space();
    let mut values = f.into_values();
    for (idx, v) in values.iter_mut().enumerate() {
        if grid.is_boundary(idx % n_space) {
            *v = 0.0;
        }
    }
    SpaceTimeField::new(grid, values).expect("finite values stay finite")
}

/// Non-negative field of one of several textures: independent node noise,
/// a smooth positive bump train, plateaus with exact ties, or sparse spikes.
/// Values range up to a random scale in `[0.1, 10]`.
pub fn rough_nonnegative<R: Rng>(grid: &Grid, rng: &mut R) -> Result<SpaceTimeField> {
    let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
    let count = grid.n_levels() * grid.n_space();
    let values: Vec<f64> = match rng.gen_range(0..4) {
        0 => (0..count).map(|_| scale * rng.gen::<f64>()).collect(),
        1 => {
            let c = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            let w = rng.gen_range(0.2..1.0) * grid.extent();
            let tw = rng.gen_range(0.2..1.0) * grid.t_end();
            return SpaceTimeField::from_fn(*grid, |x, t| {
                let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                scale * (-r2 / (w * w) - (t / tw).powi(2)).exp()
            });
        }
        2 => {
            let steps = [0.0, 0.25, 0.5, 1.0];
            (0..count)
                .map(|_| scale * steps[rng.gen_range(0..steps.len())])
                .collect()
        }
        _ => (0..count)
            .map(|_| {
                if rng.gen_bool(0.05) {
                    scale * rng.gen::<f64>()
                } else {
                    0.0
                }
            })
            .collect(),
    };
    SpaceTimeField::new(*grid, values)
}
