//! Solve a scenario and run every enabled check on the result.

use pstable_core::degiorgi::{thm1_bound, thm1_exponent, verify_at_level};
use pstable_core::energy::combined_energy_bound;
use pstable_core::iteration2::{
    classical_bounds, classical_exponents, classical_power, thm2_bound, thm2_exponent, DEFAULT_EPS, DEFAULT_R,
};
use pstable_core::levelset::{holder_2_chain, holder_p_chain, measure_bound_check};
use pstable_core::solver::{residual, solve};
use pstable_core::{
    build_cutoff, caccioppoli_sides, second_iteration, verify_degiorgi, CutoffKind, Cylinder, Error, ShrinkSchedule,
    Sides, SpaceTimeField, TraceRow,
};
use serde::Serialize;

use crate::error::CliError;
use crate::scenario::Scenario;

/// Cutoff indices used by the energy check.
pub const ENERGY_STEPS: usize = 3;
/// Steps of the Chebyshev and Hölder diagnostics.
pub const CHAIN_STEPS: usize = 10;
/// Relative slack for the Chebyshev inequality.
pub const CHEBYSHEV_TOL: f64 = 1e-12;
/// Relative slack for the Hölder chains.
pub const HOLDER_TOL: f64 = 1e-10;
/// `Y_i` counts as decayed below this value.
pub const DECAY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SolveSummary {
    pub min: f64,
    pub max: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EnergyRow {
    pub i: usize,
    pub k: f64,
    pub lhs_sup: f64,
    pub lhs_grad: f64,
    pub rhs_space: f64,
    pub rhs_time: f64,
    #[serde(rename = "C_fit")]
    pub c_fit: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ChainRow {
    pub i: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl ChainRow {
    fn new(i: usize, s: Sides) -> Self {
        ChainRow {
            i,
            lhs: s.lhs,
            rhs: s.rhs,
            ratio: s.ratio(),
        }
    }

    fn sides(&self) -> Sides {
        Sides {
            lhs: self.lhs,
            rhs: self.rhs,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EnergySummary {
    pub levels: Vec<f64>,
    pub steps_used: usize,
    pub caccioppoli_c_fit: Option<f64>,
    pub combined_c_fit: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DeGiorgiSummary {
    pub k: f64,
    pub k_overridden: bool,
    pub y0: f64,
    pub c0: f64,
    pub threshold: f64,
    pub max_ratio: f64,
    pub sup_inner: f64,
    pub satisfied: bool,
    pub decayed_at: Option<usize>,
    pub chain_level: f64,
    pub chebyshev_hold: bool,
    pub holder_hold: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Thm1Summary {
    pub exponent: f64,
    pub avg_pe: f64,
    pub raw_unit: f64,
    pub cap: f64,
    pub sup_inner: f64,
    pub c_fit: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Thm2Summary {
    pub exponent: f64,
    pub avg_p: f64,
    pub raw_unit: f64,
    pub sup_inner: f64,
    pub c_fit: f64,
    pub iteration_c_fit: Option<f64>,
    pub bb_fit: f64,
    pub limit: f64,
    pub m0: f64,
    pub dominated: bool,
    pub steps_hold: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ClassicalSummary {
    pub deg_exp: Option<f64>,
    pub sing_exp: Option<f64>,
    pub power: Option<f64>,
    pub avg: Option<f64>,
    pub lambda_r: f64,
    /// `1/|p-2|`; absent at `p = 2`.
    pub blowup: Option<f64>,
    pub deg_raw: Option<f64>,
    pub deg_cap: Option<f64>,
    pub sing_raw: Option<f64>,
    pub sing_cap: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub name: String,
    pub generator: String,
    pub seed: u64,
    pub p: f64,
    #[serde(rename = "N")]
    pub n_dim: usize,
    pub nx: usize,
    pub nt: usize,
    pub dt: f64,
    pub rho: f64,
    pub theta: f64,
    pub sigma: f64,
    pub solve: SolveSummary,
    pub energy: Option<EnergySummary>,
    pub degiorgi: Option<DeGiorgiSummary>,
    pub thm1: Option<Thm1Summary>,
    pub thm2: Option<Thm2Summary>,
    pub classical: Option<ClassicalSummary>,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Everything a verification run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub field: SpaceTimeField,
    pub summary: Summary,
    pub trace: Vec<TraceRow>,
    pub energy: Vec<EnergyRow>,
    pub combined: Vec<ChainRow>,
    pub chebyshev: Vec<ChainRow>,
    pub holder_p: Vec<ChainRow>,
    pub holder_2: Vec<ChainRow>,
    /// `M_n` of the second iteration.
    pub second: Vec<f64>,
}

pub const GENERATOR: &str = "ChaCha8Rng";

/// Runs the solver on the scenario.
pub fn solve_scenario(sc: &Scenario) -> Result<(SpaceTimeField, SolveSummary), CliError> {
    let grid = sc.grid()?;
    let cfg = sc.solver_config()?;
    let initial = sc.initial(&grid);
    let field = solve(&grid, &initial, &cfg, |x, t| sc.data(x, t, &grid))?;
    let res = if grid.nt() >= 2 { residual(&field, &cfg)? } else { 0.0 };
    let summary = SolveSummary {
        min: field.min(),
        max: field.max(),
        residual: res,
    };
    Ok((field, summary))
}

/// Solves and verifies. Check failures are recorded in the summary, not
/// returned as errors.
pub fn run(sc: &Scenario) -> Result<RunOutput, CliError> {
    sc.validate()?;
    let (field, solve) = solve_scenario(sc)?;
    verify_field(sc, field, solve)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn fits_or_coarse<T>(r: pstable_core::Result<T>) -> Result<Option<T>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::GridTooCoarse { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Runs the enabled checks on an already solved field.
pub fn verify_field(sc: &Scenario, field: SpaceTimeField, solve: SolveSummary) -> Result<RunOutput, CliError> {
    let grid = *field.grid();
    let cyl = sc.cylinder()?;
    let sigma = sc.cylinder.sigma;
    let p = sc.p;
    let n_dim = sc.n_dim;
    let params = sc.params()?;
    let schedule = ShrinkSchedule::new(sigma, cyl)?;
    let nodes = cyl.nodes(&grid);
    let inner = Cylinder::new(sigma * cyl.rho, sigma * cyl.theta)?;
    let sup_inner = inner.nodes(&grid).max(&field);
    let cyl_max = nodes.max(&field);
    let mut failures = Vec::new();

    let mut out = RunOutput {
        field: field.clone(),
        summary: Summary {
            name: sc.name.clone(),
            generator: GENERATOR.into(),
            seed: sc.seed,
            p,
            n_dim,
            nx: sc.nx,
            nt: sc.nt,
            dt: sc.dt,
            rho: cyl.rho,
            theta: cyl.theta,
            sigma,
            solve,
            energy: None,
            degiorgi: None,
            thm1: None,
            thm2: None,
            classical: None,
            passed: true,
            failures: Vec::new(),
        },
        trace: Vec::new(),
        energy: Vec::new(),
        combined: Vec::new(),
        chebyshev: Vec::new(),
        holder_p: Vec::new(),
        holder_2: Vec::new(),
        second: Vec::new(),
    };

    if sc.checks.energy {
        let mut values: Vec<f64> = Vec::with_capacity(nodes.spatial.len() * nodes.levels.len());
        for n in nodes.levels.clone() {
            values.extend(nodes.spatial.iter().map(|&s| field.at(n, s)));
        }
        values.sort_by(f64::total_cmp);
        let levels: Vec<f64> = [0.25, 0.5, 0.75]
            .iter()
            .map(|&q| quantile(&values, q).max(0.0))
            .collect();
        let mut steps_used = 0;
        for i in 0..=ENERGY_STEPS {
            let Some(cutoff) = fits_or_coarse(build_cutoff(&schedule, i, CutoffKind::Full, &grid))? else {
                break;
            };
            steps_used = i + 1;
            for &k in &levels {
                let s = caccioppoli_sides(&field, p, k, &cutoff)?;
                out.energy.push(EnergyRow {
                    i,
                    k,
                    lhs_sup: s.lhs_sup,
                    lhs_grad: s.lhs_grad,
                    rhs_space: s.rhs_space,
                    rhs_time: s.rhs_time,
                    c_fit: s.fitted_constant(),
                });
                if k > 0.0 {
                    out.combined.push(ChainRow::new(
                        i,
                        combined_energy_bound(&field, &schedule, k, i, &params)?,
                    ));
                }
            }
        }
        if steps_used == 0 {
            return Err(CliError::Config(
                "grid too coarse for the energy check: the first cutoff band spans fewer than two cells".into(),
            ));
        }
        let cacc = out
            .energy
            .iter()
            .filter_map(|r| r.c_fit)
            .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
        let combined =
            pstable_core::energy::fit_constant(out.combined.iter().map(|r| r.sides()).collect::<Vec<_>>().iter());
        let passed = cacc.is_none_or(f64::is_finite) && combined.is_none_or(f64::is_finite);
        if !passed {
            failures.push("energy: fitted constant is not finite".to_string());
        }
        out.summary.energy = Some(EnergySummary {
            levels,
            steps_used,
            caccioppoli_c_fit: cacc,
            combined_c_fit: combined,
            passed,
        });
    }

    if sc.checks.degiorgi {
        let report = match sc.k_override {
            Some(k) => verify_at_level(&field, &params, sigma, cyl, k, sc.c0.unwrap_or(1.0))?,
            None => verify_degiorgi(&field, &params, sigma, cyl, sc.c0)?,
        };
        let chain_level = cyl_max;
        if chain_level > 0.0 {
            for i in 0..=CHAIN_STEPS {
                out.chebyshev.push(ChainRow::new(
                    i,
                    measure_bound_check(&field, &schedule, chain_level, i, p)?,
                ));
                out.holder_p.push(ChainRow::new(
                    i,
                    holder_p_chain(&field, &schedule, chain_level, i, &params)?,
                ));
                if params.pe() > 2.0 {
                    out.holder_2.push(ChainRow::new(
                        i,
                        holder_2_chain(&field, &schedule, chain_level, i, &params)?,
                    ));
                }
            }
        }
        let chebyshev_hold = out.chebyshev.iter().all(|r| r.sides().holds(CHEBYSHEV_TOL));
        let holder_hold = out
            .holder_p
            .iter()
            .chain(&out.holder_2)
            .all(|r| r.sides().holds(HOLDER_TOL));
        let passed = report.satisfied && chebyshev_hold && holder_hold;
        if !report.satisfied {
            failures.push(format!(
                "degiorgi: sup over the inner cylinder {:e} exceeds k = {:e}",
                report.sup_inner, report.k
            ));
        }
        if !chebyshev_hold {
            failures.push("degiorgi: Chebyshev measure bound violated".to_string());
        }
        if !holder_hold {
            failures.push("degiorgi: Hölder chain violated".to_string());
        }
        out.summary.degiorgi = Some(DeGiorgiSummary {
            k: report.k,
            k_overridden: sc.k_override.is_some(),
            y0: report.y0,
            c0: report.c0,
            threshold: report.threshold,
            max_ratio: report.max_ratio,
            sup_inner: report.sup_inner,
            satisfied: report.satisfied,
            decayed_at: report.trace.decayed_below(DECAY_TOL),
            chain_level,
            chebyshev_hold,
            holder_hold,
            passed,
        });
        out.trace = report.trace.rows;
    }

    if sc.checks.thm1 {
        let pe = params.pe();
        let avg_pe = nodes.average(|n, s| field.at(n, s).max(0.0).powf(pe));
        let bound = thm1_bound(avg_pe, p, n_dim, sigma, cyl, 1.0)?;
        let c_fit = fitted(sup_inner, bound.raw);
        let passed = c_fit.is_finite();
        if !passed {
            failures.push("thm1: positive sup with a vanishing average".to_string());
        }
        out.summary.thm1 = Some(Thm1Summary {
            exponent: thm1_exponent(p, n_dim)?,
            avg_pe,
            raw_unit: bound.raw,
            cap: bound.cap,
            sup_inner,
            c_fit,
            passed,
        });
    }

    if sc.checks.thm2 {
        let rep = second_iteration(&field, p, sigma, cyl, 1.0)?;
        let bound = thm2_bound(rep.avg_p, p, n_dim, sigma, cyl, 1.0)?;
        let c_fit = fitted(sup_inner, bound.raw);
        let passed = rep.dominated && rep.steps_hold && c_fit.is_finite();
        if !rep.dominated {
            failures.push(format!("thm2: M_0 = {:e} exceeds the limit {:e}", rep.m[0], rep.limit));
        }
        if !rep.steps_hold {
            failures.push("thm2: a step of the second iteration fails".to_string());
        }
        if !c_fit.is_finite() {
            failures.push("thm2: positive sup with a vanishing average".to_string());
        }
        out.summary.thm2 = Some(Thm2Summary {
            exponent: thm2_exponent(p, n_dim)?,
            avg_p: rep.avg_p,
            raw_unit: bound.raw,
            sup_inner,
            c_fit,
            iteration_c_fit: rep.c_fit,
            bb_fit: rep.bb_fit,
            limit: rep.limit,
            m0: rep.m[0],
            dominated: rep.dominated,
            steps_hold: rep.steps_hold,
            passed,
        });
        out.second = rep.m;
    }

    if sc.checks.classical {
        let (deg_exp, sing_exp) = classical_exponents(p);
        let power = classical_power(p, DEFAULT_R, DEFAULT_EPS);
        let avg = power.map(|r| nodes.average(|n, s| field.at(n, s).max(0.0).powf(r)));
        let cb = classical_bounds(avg.unwrap_or(0.0), p, n_dim, sigma, cyl, DEFAULT_R, DEFAULT_EPS, 1.0)?;
        let deg = cb.deg.as_ref().ok();
        let sing = cb.sing.as_ref().ok();
        let passed = power.is_none() || deg.or(sing).is_some_and(|b| b.raw.is_finite());
        if !passed {
            failures.push("classical: the applicable bound could not be evaluated".to_string());
        }
        out.summary.classical = Some(ClassicalSummary {
            deg_exp,
            sing_exp,
            power,
            avg,
            lambda_r: cb.lambda_r,
            blowup: cb.blowup.is_finite().then_some(cb.blowup),
            deg_raw: deg.map(|b| b.raw),
            deg_cap: deg.map(|b| b.cap),
            sing_raw: sing.map(|b| b.raw),
            sing_cap: sing.map(|b| b.cap),
            passed,
        });
    }

    out.summary.passed = failures.is_empty();
    out.summary.failures = failures;
    Ok(out)
}

/// `sup / raw`, with `0/0 = 0`.
fn fitted(sup: f64, raw: f64) -> f64 {
    if sup == 0.0 {
        0.0
    } else {
        sup / raw
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(kind: &str, extra: &str) -> Scenario {
        let text = format!(
            r#"{{"name": "t", "p": 2.5, "N": 1, "nx": 41, "nt": 40, "dt": 0.05, "scenario": "{kind}",
                "cylinder": {{"rho": 0.9, "theta": 0.9, "sigma": 0.5}} {extra}}}"#
        );
        Scenario::from_json(&text).unwrap()
    }

    #[test]
    fn quantile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.0);
        assert_eq!(quantile(&v, 0.25), 1.0);
        assert_eq!(quantile(&[0.0, 1.0], 0.5), 0.5);
    }

    #[test]
    fn zero_scenario_passes_trivially() {
        let out = run(&scenario("zero", "")).unwrap();
        assert!(out.summary.passed, "{:?}", out.summary.failures);
        assert_eq!(out.summary.thm1.as_ref().unwrap().c_fit, 0.0);
        assert!(out.chebyshev.is_empty());
    }

    #[test]
    fn bump_scenario_passes() {
        let out = run(&scenario("bump", "")).unwrap();
        assert!(out.summary.passed, "{:?}", out.summary.failures);
        let dg = out.summary.degiorgi.as_ref().unwrap();
        assert!(dg.satisfied && dg.chebyshev_hold && dg.holder_hold);
        assert_eq!(out.chebyshev.len(), CHAIN_STEPS + 1);
        assert!(!out.energy.is_empty());
        assert_eq!(out.trace.len(), 26);
    }

    #[test]
    fn tiny_k_override_fails() {
        let out = run(&scenario("bump", r#", "k_override": 1e-6"#)).unwrap();
        assert!(!out.summary.passed);
        assert!(out.summary.failures[0].starts_with("degiorgi"));
    }
}
