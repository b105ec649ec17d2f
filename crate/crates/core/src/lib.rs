//! Numerical laboratory for the parabolic p-Laplace equation
//! `u_t = div(c(x,t) |grad u|^(p-2) grad u)`.
//!
//! The crate solves the equation on uniform space-time grids and measures, on
//! the discrete solutions, every inequality of the De Giorgi iteration that
//! yields sup-norm bounds which stay stable as `p -> 2`:
//!
//! * [`solver`]: backward-Euler damped-Newton solver, exact solutions, Steklov averages
//! * [`levelset`]: truncations, superlevel sets, Chebyshev and Hölder chains
//! * [`energy`]: cutoff functions, energy (Caccioppoli) and parabolic Sobolev sides
//! * [`degiorgi`]: the `Y_i` ladder, its recursion, the level choice and the first bound
//! * [`iteration2`]: the second iteration, the improved bound, classical comparators
//!   and the admissible-`eps0` root

pub mod cylinder;
pub mod degiorgi;
pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod iteration2;
pub mod levelset;
pub mod params;
pub mod random;
pub mod schedule;
pub mod solver;

pub use cylinder::{ball_measure, Cylinder, CylinderNodes};
pub use degiorgi::{verify_degiorgi, BoundValue, DeGiorgiReport, IterationTrace, RecursionConstants, TraceRow};
pub use energy::{build_cutoff, caccioppoli_sides, sobolev_sides, CaccioppoliSides, Cutoff, CutoffKind};
pub use error::{Error, Result};
pub use grid::{Grid, Point, SpaceTimeField};
pub use iteration2::{second_iteration, SecondIterationConstants, SecondIterationReport};
pub use levelset::{truncate, Sides, SuperlevelSet, TruncatedField};
pub use params::{scale_factor_a, StructureParams};
pub use schedule::{level_schedule, ExpandSchedule, ShrinkSchedule, StepRadii};
pub use solver::SolverConfig;
