//! Origin-centered parabolic cylinders `B_rho x [-theta, theta]` and the
//! node-wise quadrature used for every integral over them.

use std::f64::consts::PI;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::grid::{Grid, SpaceTimeField};

/// Relative slack for deciding whether a node lies on a cylinder boundary.
const EDGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub rho: f64,
    pub theta: f64,
}

impl Cylinder {
    pub fn new(rho: f64, theta: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite() && theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cylinder radii must be positive, got rho = {rho}, theta = {theta}"
            )));
        }
        Ok(Cylinder { rho, theta })
    }

    /// Continuum measure `|B_rho| * 2 theta` (Euclidean ball).
    pub fn measure(&self, dim: usize) -> f64 {
        ball_measure(self.rho, dim) * 2.0 * self.theta
    }

    pub fn fits(&self, grid: &Grid) -> bool {
        self.rho <= grid.extent() * (1.0 + EDGE_TOL) && self.theta <= grid.t_end() * (1.0 + EDGE_TOL)
    }

    pub fn check_fits(&self, grid: &Grid) -> Result<()> {
        if self.fits(grid) {
            Ok(())
        } else {
            Err(Error::CylinderOutOfGrid {
                rho: self.rho,
                theta: self.theta,
            })
        }
    }

    pub fn contains_point(&self, x: [f64; 2]) -> bool {
        x[0] * x[0] + x[1] * x[1] <= self.rho * self.rho * (1.0 + EDGE_TOL)
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t.abs() <= self.theta * (1.0 + EDGE_TOL)
    }

    /// Spatial node indices inside `B_rho`, in increasing order.
    pub fn spatial_nodes(&self, grid: &Grid) -> Vec<usize> {
        (0..grid.n_space())
            .filter(|&s| self.contains_point(grid.coords(s)))
            .collect()
    }

    /// Range of time levels inside `[-theta, theta]`.
    pub fn time_levels(&self, grid: &Grid) -> Range<usize> {
        let lo = (0..grid.n_levels()).find(|&n| self.contains_time(grid.time(n)));
        match lo {
            None => 0..0,
            Some(lo) => {
                let hi = (lo..grid.n_levels())
                    .take_while(|&n| self.contains_time(grid.time(n)))
                    .last()
                    .unwrap_or(lo);
                lo..hi + 1
            }
        }
    }

    /// Precomputed node set for repeated quadrature over this cylinder.
    pub fn nodes(&self, grid: &Grid) -> CylinderNodes {
        CylinderNodes {
            spatial: self.spatial_nodes(grid),
            levels: self.time_levels(grid),
            weight: grid.cell_volume(),
            measure: self.measure(grid.dim()),
        }
    }
}

pub fn ball_measure(rho: f64, dim: usize) -> f64 {
    match dim {
        1 => 2.0 * rho,
        2 => PI * rho * rho,
        n => PI.powf(n as f64 / 2.0) / gamma_half_int(n + 2) * rho.powi(n as i32),
    }
}

/// Gamma(m / 2) for positive integer m.
fn gamma_half_int(m: usize) -> f64 {
    if m == 1 {
        PI.sqrt()
    } else if m == 2 {
        1.0
    } else {
        (m as f64 / 2.0 - 1.0) * gamma_half_int(m - 2)
    }
}

/// The grid nodes of a cylinder with their common midpoint weight.
#[derive(Debug, Clone)]
pub struct CylinderNodes {
    pub spatial: Vec<usize>,
    pub levels: Range<usize>,
    pub weight: f64,
    /// Continuum measure of the cylinder, used for averaged integrals.
    pub measure: f64,
}

impl CylinderNodes {
    /// `sum f(n, s) * h^N dt` over nodes, in a fixed order.
    pub fn integrate(&self, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for n in self.levels.clone() {
            for &s in &self.spatial {
                acc += f(n, s);
            }
        }
        acc * self.weight
    }

    /// Integral divided by the continuum measure.
    pub fn average(&self, f: impl FnMut(usize, usize) -> f64) -> f64 {
        self.integrate(f) / self.measure
    }

    /// Node-count measure of `{f(n, s)}` holding, i.e. the quadrature of an indicator.
    pub fn measure_where(&self, mut pred: impl FnMut(usize, usize) -> bool) -> f64 {
        self.integrate(|n, s| if pred(n, s) { 1.0 } else { 0.0 })
    }

    pub fn max(&self, field: &SpaceTimeField) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for n in self.levels.clone() {
            for &s in &self.spatial {
                m = m.max(field.at(n, s));
            }
        }
        m
    }

    pub fn is_empty(&self) -> bool {
        self.spatial.is_empty() || self.levels.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_measures() {
        assert_eq!(ball_measure(2.0, 1), 4.0);
        assert!((ball_measure(1.0, 2) - PI).abs() < 1e-15);
        assert!((ball_measure(1.0, 3) - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn node_sets_and_levels() {
        let g = Grid::new(1, 1.0, 11, 10, 0.1).unwrap();
        let c = Cylinder::new(0.4, 0.2).unwrap();
        let nodes = c.nodes(&g);
        assert_eq!(nodes.spatial, vec![3, 4, 5, 6, 7]);
        assert_eq!(nodes.levels, 3..8);
        // constant 1: 5 nodes * 5 levels * h * dt
        let vol = nodes.integrate(|_, _| 1.0);
        assert!((vol - 25.0 * 0.2 * 0.1).abs() < 1e-12);
    }

    #[test]
    fn out_of_grid_detected() {
        let g = Grid::new(1, 1.0, 11, 10, 0.1).unwrap();
        assert!(Cylinder::new(1.0, 0.5).unwrap().check_fits(&g).is_ok());
        assert!(Cylinder::new(1.1, 0.5).unwrap().check_fits(&g).is_err());
        assert!(Cylinder::new(0.5, 0.6).unwrap().check_fits(&g).is_err());
    }
}
