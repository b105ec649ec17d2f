//! Parameter sweeps: one full verification run per axis value.

use std::path::Path;
use std::str::FromStr;

use pstable_core::iteration2::exponent_row;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::write_csv;
use crate::pipeline::run;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    P,
    Sigma,
    Grid,
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "p" => Ok(Axis::P),
            "sigma" => Ok(Axis::Sigma),
            "grid" => Ok(Axis::Grid),
            other => Err(CliError::Config(format!(
                "unknown sweep axis '{other}' (expected p, sigma or grid)"
            ))),
        }
    }
}

pub const SWEEP_HEADER: [&str; 16] = [
    "p", "N", "thm1_exp", "thm2_exp", "deg_exp", "sing_exp", "delta0", "sigma", "nx", "sup", "bound", "ratio",
    "thm1_c", "thm2_c", "c0", "passed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    #[serde(rename = "N")]
    pub n_dim: usize,
    pub thm1_exp: Option<f64>,
    pub thm2_exp: Option<f64>,
    pub deg_exp: Option<f64>,
    pub sing_exp: Option<f64>,
    pub delta0: f64,
    pub sigma: f64,
    pub nx: usize,
    /// Maximum over the inner cylinder.
    pub sup: f64,
    /// De Giorgi level `k`.
    pub bound: Option<f64>,
    /// `sup / bound`.
    pub ratio: Option<f64>,
    pub thm1_c: Option<f64>,
    pub thm2_c: Option<f64>,
    pub c0: Option<f64>,
    pub passed: bool,
}

/// Scenarios for every value on `axis`, in file order.
pub fn points(sc: &Scenario, axis: Axis) -> Result<Vec<Scenario>, CliError> {
    let mut out = Vec::new();
    match axis {
        Axis::P => {
            for &p in &sc.sweep.p {
                out.push(Scenario { p, ..sc.clone() });
            }
        }
        Axis::Sigma => {
            for &sigma in &sc.sweep.sigma {
                let mut s = sc.clone();
                s.cylinder.sigma = sigma;
                out.push(s);
            }
        }
        Axis::Grid => {
            for &nx in &sc.sweep.grid {
                out.push(Scenario { nx, ..sc.clone() });
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("sweep list for axis {axis:?} is empty")));
    }
    for s in &out {
        s.validate()?;
    }
    Ok(out)
}

fn row(sc: &Scenario) -> Result<SweepRow, CliError> {
    let out = run(sc)?;
    let s = &out.summary;
    let e = exponent_row(sc.p, sc.n_dim);
    let sup = s
        .thm1
        .as_ref()
        .map(|t| t.sup_inner)
        .or(s.thm2.as_ref().map(|t| t.sup_inner))
        .or(s.degiorgi.as_ref().map(|d| d.sup_inner))
        .unwrap_or(f64::NAN);
    let bound = s.degiorgi.as_ref().map(|d| d.k);
    Ok(SweepRow {
        p: sc.p,
        n_dim: sc.n_dim,
        thm1_exp: e.thm1,
        thm2_exp: e.thm2,
        deg_exp: e.deg,
        sing_exp: e.sing,
        delta0: e.delta0,
        sigma: sc.cylinder.sigma,
        nx: sc.nx,
        sup,
        bound,
        ratio: s.degiorgi.as_ref().map(|d| d.sup_inner / d.k),
        thm1_c: s.thm1.as_ref().map(|t| t.c_fit),
        thm2_c: s.thm2.as_ref().map(|t| t.c_fit),
        c0: s.degiorgi.as_ref().map(|d| d.c0),
        passed: s.passed,
    })
}

/// Runs every point on up to `jobs` threads. Rows come back in axis order.
pub fn sweep(sc: &Scenario, axis: Axis, jobs: usize) -> Result<Vec<SweepRow>, CliError> {
    let pts = points(sc, axis)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    let results: Vec<Result<SweepRow, CliError>> = pool.install(|| pts.par_iter().map(row).collect());
    results.into_iter().collect()
}

pub fn write_sweep(path: &Path, seed: u64, rows: &[SweepRow]) -> Result<(), CliError> {
    write_csv(path, seed, rows, &SWEEP_HEADER)
}
