//! Uniform space-time grids centered at the origin and the fields living on them.
//!
//! Spatial nodes sit at `x_j = -extent + j h` with `h = 2 extent / (nx - 1)`
//! on every axis, so an odd `nx` puts a node at the origin. Time levels are
//! `t_n = -nt dt / 2 + n dt` for `n = 0..=nt`, so the time axis is the
//! symmetric interval `[-nt dt / 2, nt dt / 2]`.

use crate::error::{Error, Result};

/// A spatial point; the second coordinate is zero in one dimension.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    extent: f64,
    nx: usize,
    nt: usize,
    dt: f64,
}

impl Grid {
    pub fn new(dim: usize, extent: f64, nx: usize, nt: usize, dt: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if nx < 3 || nx.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("nx must be odd and at least 3, got {nx}")));
        }
        if nt == 0 {
            return Err(Error::InvalidGrid("nt must be positive".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::InvalidGrid(format!("extent must be positive, got {extent}")));
        }
        Ok(Grid {
            dim,
            extent,
            nx,
            nt,
            dt,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Spatial mesh width.
    pub fn h(&self) -> f64 {
        2.0 * self.extent / (self.nx - 1) as f64
    }

    /// Number of spatial nodes, `nx^dim`.
    pub fn n_space(&self) -> usize {
        self.nx.pow(self.dim as u32)
    }

    /// Number of time levels, `nt + 1`.
    pub fn n_levels(&self) -> usize {
        self.nt + 1
    }

    pub fn t_start(&self) -> f64 {
        -0.5 * self.nt as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        0.5 * self.nt as f64 * self.dt
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t_start() + n as f64 * self.dt
    }

    pub fn axis_coord(&self, j: usize) -> f64 {
        -self.extent + j as f64 * self.h()
    }

    /// Per-axis indices of a spatial node (`iy = 0` in one dimension).
    pub fn axis_indices(&self, s: usize) -> (usize, usize) {
        match self.dim {
            1 => (s, 0),
            _ => (s % self.nx, s / self.nx),
        }
    }

    pub fn coords(&self, s: usize) -> Point {
        let (ix, iy) = self.axis_indices(s);
        match self.dim {
            1 => [self.axis_coord(ix), 0.0],
            _ => [self.axis_coord(ix), self.axis_coord(iy)],
        }
    }

    pub fn is_boundary(&self, s: usize) -> bool {
        let (ix, iy) = self.axis_indices(s);
        let last = self.nx - 1;
        match self.dim {
            1 => ix == 0 || ix == last,
            _ => ix == 0 || ix == last || iy == 0 || iy == last,
        }
    }

    /// Quadrature weight of one space-time node: `h^N dt`.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32) * self.dt
    }

    /// Same grid with a different spatial resolution.
    pub fn with_nx(&self, nx: usize) -> Result<Self> {
        Grid::new(self.dim, self.extent, nx, self.nt, self.dt)
    }

    /// One refinement level: spacing and time step both halved.
    pub fn refined(&self) -> Self {
        Grid {
            nx: 2 * self.nx - 1,
            nt: 2 * self.nt,
            dt: 0.5 * self.dt,
            ..*self
        }
    }
}

/// A scalar function sampled at every (time level, spatial node) of a grid.
///
/// Values are stored time-major: level `n`, node `s` lives at `n * n_space + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid,
    values: Vec<f64>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let expected = grid.n_levels() * grid.n_space();
        if values.len() != expected {
            return Err(Error::InvalidField(format!(
                "expected {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at index {pos}")));
        }
        Ok(SpaceTimeField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        SpaceTimeField {
            grid,
            values: vec![0.0; grid.n_levels() * grid.n_space()],
        }
    }

    /// Samples `f(x, t)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(Point, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.n_levels() * grid.n_space());
        for n in 0..grid.n_levels() {
            let t = grid.time(n);
            for s in 0..grid.n_space() {
                values.push(f(grid.coords(s), t));
            }
        }
        SpaceTimeField::new(grid, values)
    }

    /// Stacks spatial slices, one per time level.
    pub fn from_slices(grid: Grid, slices: &[Vec<f64>]) -> Result<Self> {
        if slices.len() != grid.n_levels() {
            return Err(Error::InvalidField(format!(
                "expected {} slices, got {}",
                grid.n_levels(),
                slices.len()
            )));
        }
        let values = slices.concat();
        SpaceTimeField::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, n: usize, s: usize) -> f64 {
        self.values[n * self.grid.n_space() + s]
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        let ns = self.grid.n_space();
        &self.values[n * ns..(n + 1) * ns]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Fails unless every value is at least `-tol`.
    pub fn require_nonnegative(&self, tol: f64) -> Result<()> {
        let min = self.min();
        if min < -tol {
            return Err(Error::InvalidField(format!(
                "field must be non-negative, min = {min:e}"
            )));
        }
        Ok(())
    }

    /// Node-wise map into a new field on the same grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        SpaceTimeField::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        SpaceTimeField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * lambda).collect(),
        }
    }

    /// Node-wise product with another field on the same grid.
    pub fn product(&self, other: &SpaceTimeField) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidField("grids differ".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        SpaceTimeField::new(self.grid, values)
    }

    /// Spatial gradient at node `s` of level `n`: centered differences in the
    /// interior, one-sided on the grid boundary.
    pub fn gradient(&self, n: usize, s: usize) -> Point {
        slice_gradient(&self.grid, self.slice(n), s)
    }
}

/// Spatial gradient of a single slice, same stencil as [`SpaceTimeField::gradient`].
pub fn slice_gradient(grid: &Grid, u: &[f64], s: usize) -> Point {
    let h = grid.h();
    let nx = grid.nx();
    let (ix, iy) = grid.axis_indices(s);
    let axis = |i: usize, stride: usize| -> f64 {
        if i == 0 {
            (u[s + stride] - u[s]) / h
        } else if i == nx - 1 {
            (u[s] - u[s - stride]) / h
        } else {
            (u[s + stride] - u[s - stride]) / (2.0 * h)
        }
    };
    match grid.dim() {
        1 => [axis(ix, 1), 0.0],
        _ => [axis(ix, 1), axis(iy, nx)],
    }
}

pub(crate) fn norm(g: Point) -> f64 {
    (g[0] * g[0] + g[1] * g[1]).sqrt()
}
