//! Shared fixtures for the criterion benchmarks.

use pstable_core::{Grid, SolverConfig, StructureParams};

/// Compactly supported bump `amp (1 - |x|^2 / r^2)_+^2` sampled on the spatial nodes.
pub fn bump_slice(grid: &Grid, amp: f64, radius: f64) -> Vec<f64> {
    (0..grid.n_space())
        .map(|s| {
            let x = grid.coords(s);
            amp * (1.0 - (x[0] * x[0] + x[1] * x[1]) / (radius * radius)).max(0.0).powi(2)
        })
        .collect()
}

pub fn config(dim: usize, p: f64) -> SolverConfig {
    SolverConfig::new(StructureParams::first_bound(dim, p).expect("valid parameters"))
}
