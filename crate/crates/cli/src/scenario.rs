//! Scenario files: one JSON document per experiment.

use std::f64::consts::PI;
use std::path::Path;

use pstable_core::params::{p_min_first_bound, p_min_second_bound};
use pstable_core::solver::{exact_power_value, DEFAULT_DELTA, DEFAULT_NEWTON_MAX, DEFAULT_NEWTON_TOL};
use pstable_core::{Cylinder, Grid, Point, SolverConfig, SpaceTimeField, StructureParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Zero initial and boundary data.
    Zero,
    /// Compactly supported bump `A (1 - |x|^2 / w^2)_+^2`, zero boundary.
    Bump,
    /// The 1D power solution with amplitude `B = amplitude`, exact boundary data.
    ExactPower,
    /// Stationary affine profile `A (1 + x / (2L))`.
    Affine,
    /// Seeded sum of bumps, optionally with a seeded coefficient in `[Lambda0, Lambda1]`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSpec {
    pub rho: f64,
    pub theta: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Checks {
    pub energy: bool,
    pub degiorgi: bool,
    pub thm1: bool,
    pub thm2: bool,
    pub classical: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Checks {
            energy: true,
            degiorgi: true,
            thm1: true,
            thm2: true,
            classical: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub p: Vec<f64>,
    pub sigma: Vec<f64>,
    pub grid: Vec<usize>,
}

fn default_extent() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_tol() -> f64 {
    DEFAULT_NEWTON_TOL
}
fn default_newton_max() -> usize {
    DEFAULT_NEWTON_MAX
}
fn one() -> f64 {
    1.0
}
fn default_width() -> f64 {
    0.7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub p: f64,
    #[serde(rename = "N")]
    pub n_dim: usize,
    pub nx: usize,
    pub nt: usize,
    pub dt: f64,
    #[serde(default = "default_extent")]
    pub extent: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_max")]
    pub newton_max: usize,
    pub scenario: Kind,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "one")]
    pub lambda0: f64,
    #[serde(default = "one")]
    pub lambda1: f64,
    #[serde(default)]
    pub seed: u64,
    /// Fixed `C0` for the iteration; calibrated when absent.
    #[serde(default)]
    pub c0: Option<f64>,
    /// Level used instead of the computed `k`.
    #[serde(default)]
    pub k_override: Option<f64>,
    pub cylinder: CylinderSpec,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default)]
    pub sweep: SweepAxes,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.n_dim, self.extent, self.nx, self.nt, self.dt).map_err(CliError::from)
    }

    pub fn params(&self) -> Result<StructureParams, CliError> {
        StructureParams::first_bound(self.n_dim, self.p)
            .and_then(|s| StructureParams::new(s.n_dim, s.p, self.lambda0, self.lambda1, s.eps0))
            .map_err(CliError::from)
    }

    pub fn cylinder(&self) -> Result<Cylinder, CliError> {
        Cylinder::new(self.cylinder.rho, self.cylinder.theta).map_err(CliError::from)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let grid = self.grid()?;
        self.params()?;
        self.cylinder()?.check_fits(&grid).map_err(CliError::from)?;
        let sigma = self.cylinder.sigma;
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(CliError::Config(format!("sigma must lie in (0, 1), got {sigma}")));
        }
        if !(self.newton_tol > 0.0 && self.delta >= 0.0 && self.newton_max > 0) {
            return Err(CliError::Config(
                "need newton_tol > 0, delta >= 0, newton_max > 0".into(),
            ));
        }
        if !(self.amplitude >= 0.0 && self.width > 0.0) {
            return Err(CliError::Config("need amplitude >= 0 and width > 0".into()));
        }
        if self.scenario == Kind::ExactPower && self.n_dim != 1 {
            return Err(CliError::Config("exact_power needs N = 1".into()));
        }
        if self.scenario == Kind::ExactPower && self.amplitude <= 0.0 {
            return Err(CliError::Config("exact_power needs amplitude > 0".into()));
        }
        if (self.checks.degiorgi || self.checks.thm1 || self.checks.energy) && self.p <= p_min_first_bound(self.n_dim) {
            return Err(CliError::Config(format!(
                "energy, degiorgi and thm1 checks need p > {}",
                p_min_first_bound(self.n_dim)
            )));
        }
        if self.checks.thm2 && self.p <= p_min_second_bound(self.n_dim) {
            return Err(CliError::Config(format!(
                "thm2 check needs p > {}",
                p_min_second_bound(self.n_dim)
            )));
        }
        if let Some(k) = self.k_override {
            if !(k > 0.0) {
                return Err(CliError::Config(format!("k_override must be positive, got {k}")));
            }
        }
        if let Some(c) = self.c0 {
            if !(c > 0.0) {
                return Err(CliError::Config(format!("c0 must be positive, got {c}")));
            }
        }
        Ok(())
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::new(self.params()?);
        cfg.delta = self.delta;
        cfg.newton_tol = self.newton_tol;
        cfg.newton_max = self.newton_max;
        if self.scenario == Kind::Random && self.lambda1 > self.lambda0 {
            cfg.coefficient = Some(self.coefficient(&self.grid()?)?);
        }
        Ok(cfg)
    }

    fn coefficient(&self, grid: &Grid) -> Result<SpaceTimeField, CliError> {
        // separate stream from the initial data
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let (k, phase) = (rng.gen_range(1.0..3.0), rng.gen_range(0.0..2.0 * PI));
        let (l0, l1) = (self.lambda0, self.lambda1);
        SpaceTimeField::from_fn(*grid, |x, t| {
            l0 + (l1 - l0) * 0.5 * (1.0 + (k * x[0] + 0.7 * x[1] + 2.0 * t + phase).sin())
        })
        .map_err(CliError::from)
    }

    pub fn initial(&self, grid: &Grid) -> Vec<f64> {
        let t0 = grid.t_start();
        (0..grid.n_space())
            .map(|s| self.data(grid.coords(s), t0, grid))
            .collect()
    }

    /// Initial and boundary data at `(x, t)`.
    pub fn data(&self, x: Point, t: f64, grid: &Grid) -> f64 {
        let a = self.amplitude;
        let r2 = x[0] * x[0] + x[1] * x[1];
        match self.scenario {
            Kind::Zero => 0.0,
            Kind::Bump => a * (1.0 - r2 / (self.width * self.width)).max(0.0).powi(2),
            Kind::ExactPower => exact_power_value(a, self.p, x[0], t, grid.t_start()),
            Kind::Affine => a * (1.0 + x[0] / (2.0 * grid.extent())),
            Kind::Random => {
                let edge = grid.extent() * (1.0 - 1e-12);
                if x[..grid.dim()].iter().any(|c| c.abs() >= edge) {
                    return 0.0;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut v = 0.0;
                for _ in 0..4 {
                    let c = [rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)];
                    let h = a * rng.gen_range(0.2..1.0);
                    let w = self.width * rng.gen_range(0.3..1.0);
                    let d2 = (x[0] - c[0]).powi(2) + if grid.dim() == 2 { (x[1] - c[1]).powi(2) } else { 0.0 };
                    v += h * (1.0 - d2 / (w * w)).max(0.0).powi(2);
                }
                v
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"name": "m", "p": 2.5, "N": 1, "nx": 41, "nt": 40, "dt": 0.05,
        "scenario": "bump", "cylinder": {"rho": 0.9, "theta": 0.9, "sigma": 0.5}}"#;

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.extent, 1.0);
        assert_eq!(s.newton_max, DEFAULT_NEWTON_MAX);
        assert_eq!(s.checks, Checks::default());
        assert!(s.c0.is_none() && s.k_override.is_none());
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(Scenario::from_json("{"), Err(CliError::Config(_))));
        let even = MINIMAL.replace("\"nx\": 41", "\"nx\": 40");
        assert!(matches!(Scenario::from_json(&even), Err(CliError::Config(_))));
        let wide = MINIMAL.replace("\"rho\": 0.9", "\"rho\": 1.5");
        assert!(matches!(Scenario::from_json(&wide), Err(CliError::Config(_))));
        let unknown = MINIMAL.replace("\"name\"", "\"colour\": 1, \"name\"");
        assert!(matches!(Scenario::from_json(&unknown), Err(CliError::Config(_))));
        let low_p = MINIMAL.replace("\"p\": 2.5", "\"p\": 0.6");
        assert!(matches!(Scenario::from_json(&low_p), Err(CliError::Config(_))));
    }

    #[test]
    fn random_data_is_seeded() {
        let mut s = Scenario::from_json(MINIMAL).unwrap();
        s.scenario = Kind::Random;
        let g = s.grid().unwrap();
        let a = s.initial(&g);
        assert_eq!(a, s.initial(&g));
        s.seed = 1;
        assert_ne!(a, s.initial(&g));
        assert!(a.iter().all(|&v| v >= 0.0));
    }
}
