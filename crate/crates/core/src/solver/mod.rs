//! Backward-Euler solver for `u_t = div(c(x,t) |grad u|^(p-2) grad u)` with
//! Dirichlet data, plus exact solutions and diagnostics used to validate it.
//!
//! Each step solves the nonlinear system with damped Newton. When three
//! successive halvings of the Newton step fail to decrease the residual, one
//! lagged-diffusivity (Picard) step is taken instead and Newton resumes from
//! there.

mod banded;
mod exact;
mod operator;
mod steklov;

pub use banded::BandMatrix;
pub use exact::{exact_power, exact_power_value, power_rate};
pub use operator::flux_vector;
pub use steklov::steklov_average;

use crate::error::{Error, Result};
use crate::grid::{Grid, Point, SpaceTimeField};
use crate::params::StructureParams;

use operator::{Face, Linearization, System};

pub const DEFAULT_DELTA: f64 = 1e-8;
pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEFAULT_NEWTON_MAX: usize = 60;

/// Step-length factors tried before falling back to a lagged-diffusivity step.
const DAMPING: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub params: StructureParams,
    /// Gradient regularization `delta`.
    pub delta: f64,
    /// Max-norm tolerance on the step residual `u - u_prev - dt div F(u)`.
    pub newton_tol: f64,
    pub newton_max: usize,
    /// Optional coefficient `c(x, t)`; `c = 1` when absent.
    pub coefficient: Option<SpaceTimeField>,
}

impl SolverConfig {
    pub fn new(params: StructureParams) -> Self {
        SolverConfig {
            params,
            delta: DEFAULT_DELTA,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max: DEFAULT_NEWTON_MAX,
            coefficient: None,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            )));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be non-negative, got {}",
                self.delta
            )));
        }
        if self.newton_max == 0 {
            return Err(Error::InvalidParameter("newton_max must be positive".into()));
        }
        if self.params.n_dim != grid.dim() {
            return Err(Error::Dimension {
                expected: self.params.n_dim,
                found: grid.dim(),
            });
        }
        if let Some(c) = &self.coefficient {
            if c.grid() != grid {
                return Err(Error::InvalidParameter("coefficient lives on a different grid".into()));
            }
            let (lo, hi) = (self.params.lambda0, self.params.lambda1);
            if c.min() < lo || c.max() > hi {
                return Err(Error::InvalidParameter(format!(
                    "coefficient range [{}, {}] violates [{lo}, {hi}]",
                    c.min(),
                    c.max()
                )));
            }
        } else if self.params.lambda0 > 1.0 || self.params.lambda1 < 1.0 {
            return Err(Error::InvalidParameter(
                "default coefficient c = 1 violates [Lambda0, Lambda1]".into(),
            ));
        }
        Ok(())
    }

    fn coefficient_slice(&self, level: usize) -> Option<&[f64]> {
        self.coefficient.as_ref().map(|c| c.slice(level))
    }
}

/// Convergence record of one implicit step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub newton_iterations: usize,
    pub lagged_steps: usize,
    pub residual: f64,
}

/// Reusable per-grid state for implicit steps.
pub struct Stepper<'a> {
    grid: Grid,
    config: &'a SolverConfig,
    faces: Vec<Face>,
    matrix: BandMatrix,
}

impl<'a> Stepper<'a> {
    pub fn new(grid: Grid, config: &'a SolverConfig) -> Result<Self> {
        config.validate(&grid)?;
        let faces = operator::faces(&grid);
        let bw = operator::bandwidth(&grid);
        Ok(Stepper {
            grid,
            config,
            faces,
            matrix: BandMatrix::zeros(grid.n_space(), bw, bw),
        })
    }

    /// Advances `u_prev` by one time step to level `level`; `boundary` supplies
    /// the Dirichlet values (only its boundary entries are read).
    pub fn step(&mut self, u_prev: &[f64], boundary: &[f64], level: usize) -> Result<(Vec<f64>, StepStats)> {
        let grid = self.grid;
        let n = grid.n_space();
        if u_prev.len() != n || boundary.len() != n {
            return Err(Error::InvalidField(format!("slices must have {n} entries")));
        }
        let cfg = self.config;
        let system = System {
            grid: &grid,
            faces: &self.faces,
            p: cfg.params.p,
            delta: cfg.delta,
            dt: grid.dt(),
            coeff: cfg.coefficient_slice(level),
        };
        let mut u: Vec<f64> = (0..n)
            .map(|s| if grid.is_boundary(s) { boundary[s] } else { u_prev[s] })
            .collect();
        let mut r = system.residual(&u, u_prev, boundary);
        let mut stats = StepStats {
            newton_iterations: 0,
            lagged_steps: 0,
            residual: max_abs(&r),
        };
        while stats.residual > cfg.newton_tol {
            if stats.newton_iterations >= cfg.newton_max {
                return Err(Error::NonConvergence {
                    iterations: stats.newton_iterations,
                    residual: stats.residual,
                    time_index: Some(level),
                });
            }
            stats.newton_iterations += 1;
            let mut dir: Vec<f64> = r.iter().map(|v| -v).collect();
            system.assemble(&u, Linearization::Newton, &mut self.matrix);
            let norm0 = l2(&r);
            let mut accepted = None;
            if self.matrix.solve_in_place(&mut dir).is_ok() {
                for &lambda in &DAMPING {
                    let trial: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a + lambda * d).collect();
                    let rt = system.residual(&trial, u_prev, boundary);
                    if l2(&rt) < (1.0 - 1e-4 * lambda) * norm0 {
                        accepted = Some((trial, rt));
                        break;
                    }
                }
            }
            let (next, rn) = match accepted {
                Some(found) => found,
                None => {
                    stats.lagged_steps += 1;
                    let mut d: Vec<f64> = r.iter().map(|v| -v).collect();
                    system.assemble(&u, Linearization::Lagged, &mut self.matrix);
                    self.matrix.solve_in_place(&mut d)?;
                    let trial: Vec<f64> = u.iter().zip(&d).map(|(a, d)| a + d).collect();
                    let rt = system.residual(&trial, u_prev, boundary);
                    (trial, rt)
                }
            };
            u = next;
            r = rn;
            stats.residual = max_abs(&r);
        }
        Ok((u, stats))
    }
}

/// One backward-Euler step; see [`Stepper::step`].
pub fn step_implicit(
    grid: &Grid,
    u_prev: &[f64],
    config: &SolverConfig,
    boundary: &[f64],
    level: usize,
) -> Result<Vec<f64>> {
    Stepper::new(*grid, config)?
        .step(u_prev, boundary, level)
        .map(|(u, _)| u)
}

/// Marches `initial` through every time level of `grid`. Boundary values at
/// level `n` are `boundary(x, t_n)`.
pub fn solve(
    grid: &Grid,
    initial: &[f64],
    config: &SolverConfig,
    boundary: impl Fn(Point, f64) -> f64,
) -> Result<SpaceTimeField> {
    let mut stepper = Stepper::new(*grid, config)?;
    if initial.len() != grid.n_space() {
        return Err(Error::InvalidField(format!(
            "initial slice must have {} entries",
            grid.n_space()
        )));
    }
    let mut values = Vec::with_capacity(grid.n_levels() * grid.n_space());
    values.extend_from_slice(initial);
    let mut prev = initial.to_vec();
    let mut bc = vec![0.0; grid.n_space()];
    for level in 1..grid.n_levels() {
        let t = grid.time(level);
        for (s, b) in bc.iter_mut().enumerate() {
            if grid.is_boundary(s) {
                *b = boundary(grid.coords(s), t);
            }
        }
        let (next, _) = stepper.step(&prev, &bc, level)?;
        values.extend_from_slice(&next);
        prev = next;
    }
    SpaceTimeField::new(*grid, values)
}

/// Node-wise PDE residual `u_t - div F(u)` with a centered time difference,
/// on interior nodes of interior time levels; zero elsewhere.
pub fn residual_field(field: &SpaceTimeField, config: &SolverConfig) -> Result<SpaceTimeField> {
    let grid = *field.grid();
    if grid.nt() < 2 {
        return Err(Error::InvalidGrid("residual needs at least two time steps".into()));
    }
    config.validate(&grid)?;
    let faces = operator::faces(&grid);
    let ns = grid.n_space();
    let mut out = vec![0.0; grid.n_levels() * ns];
    for n in 1..grid.nt() {
        let div = operator::divergence(
            &grid,
            &faces,
            field.slice(n),
            config.coefficient_slice(n),
            config.params.p,
            config.delta,
        );
        for s in 0..ns {
            if !grid.is_boundary(s) {
                let ut = (field.at(n + 1, s) - field.at(n - 1, s)) / (2.0 * grid.dt());
                out[n * ns + s] = ut - div[s];
            }
        }
    }
    SpaceTimeField::new(grid, out)
}

/// Max over interior nodes of `|u_t - div F(u)|`.
pub fn residual(field: &SpaceTimeField, config: &SolverConfig) -> Result<f64> {
    Ok(residual_field(field, config)?
        .values()
        .iter()
        .fold(0.0, |m, v| m.max(v.abs())))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
