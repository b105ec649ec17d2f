//! The level-set iteration: the sequence `Y_i`, its nonlinear recursion, the
//! fast geometric convergence lemma, the level `k` that starts the recursion
//! below threshold, and the resulting sup bound.

use crate::cylinder::Cylinder;
use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;
use crate::params::{p_min_first_bound, scale_factor_a, StructureParams};
use crate::schedule::{level_schedule, ShrinkSchedule};

/// Depth of the iteration.
pub const MAX_STEPS: usize = 25;
/// `Y_i` below this is treated as zero.
pub const Y_FLOOR: f64 = 1e-12;

/// Constants of the recursion at a fixed level `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionConstants {
    pub alpha: f64,
    pub b: f64,
    pub upsilon: f64,
    pub a_k: f64,
    pub a_cap: f64,
    pub c0: f64,
}

fn alpha_of(params: &StructureParams) -> f64 {
    params.p / params.n() * (params.pe() / params.q())
}

impl RecursionConstants {
    pub fn new(params: &StructureParams, sigma: f64, cylinder: Cylinder, k: f64, c0: f64) -> Result<Self> {
        params.require_admissible()?;
        check_sigma(sigma)?;
        if !(k > 0.0) {
            return Err(Error::InvalidParameter(format!("level k must be positive, got {k}")));
        }
        let alpha = alpha_of(params);
        let n = params.n();
        Ok(RecursionConstants {
            alpha,
            b: 2f64.powf(params.pe() * (1.0 + alpha)),
            upsilon: (1.0 - sigma).powf((n + params.p) * alpha),
            a_k: a_k_value(cylinder.rho, cylinder.theta, params.n_dim, params.p, params.eps0, k)?,
            a_cap: scale_factor_a(cylinder.rho, cylinder.theta, params.n_dim, params.p),
            c0,
        })
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "sigma must lie in (0, 1), got {sigma}"
        )))
    }
}

/// `(theta / rho^p) / k^{eps0 (N+p)/p} + (rho^p / theta)^{N/p} / k^{(p+eps0-2)(N+p)/p}`.
pub fn a_k_value(rho: f64, theta: f64, n_dim: usize, p: f64, eps0: f64, k: f64) -> Result<f64> {
    if p + eps0 <= 2.0 {
        return Err(Error::Admissibility(format!("p + eps0 = {} must exceed 2", p + eps0)));
    }
    let n = n_dim as f64;
    let rp = rho.powf(p);
    Ok(theta / rp / k.powf(eps0 * (n + p) / p) + (rp / theta).powf(n / p) / k.powf((p + eps0 - 2.0) * (n + p) / p))
}

/// Predicted bound on `Y_{i+1}` from `Y_i`.
pub fn recursion_rhs(y: f64, consts: &RecursionConstants, params: &StructureParams, k: f64, i: usize) -> f64 {
    let (pe, q) = (params.pe(), params.q());
    consts.c0 * consts.b.powi(i as i32) / consts.upsilon
        * consts.a_k.powf(consts.alpha)
        * k.powf(pe * (pe - q) / q)
        * y.powf(1.0 + consts.alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricTrace {
    pub threshold: f64,
    /// `Y_0, ..., Y_{n_max}` of the equality recursion.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Unrolls `Y_{n+1} = C b^n Y_n^{1+alpha}` (in log space) and reports the
/// threshold `C^{-1/alpha} b^{-1/alpha^2}`.
pub fn geometric_lemma(y0: f64, c: f64, b: f64, alpha: f64, n_max: usize) -> Result<GeometricTrace> {
    if !(c > 0.0 && b > 1.0 && alpha > 0.0 && y0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need C > 0, b > 1, alpha > 0, Y0 >= 0; got C = {c}, b = {b}, alpha = {alpha}, Y0 = {y0}"
        )));
    }
    let threshold = (-(c.ln()) / alpha - b.ln() / (alpha * alpha)).exp();
    let mut trace = Vec::with_capacity(n_max + 1);
    let mut ln_y = y0.ln();
    trace.push(y0);
    for n in 0..n_max {
        ln_y = c.ln() + n as f64 * b.ln() + (1.0 + alpha) * ln_y;
        trace.push(ln_y.exp());
    }
    let converged = trace.iter().any(|&y| y < Y_FLOOR);
    Ok(GeometricTrace {
        threshold,
        trace,
        converged,
    })
}

fn ln_threshold_factor(params: &StructureParams, sigma: f64, cylinder: Cylinder, c0: f64) -> Result<(f64, f64)> {
    params.require_admissible()?;
    check_sigma(sigma)?;
    if !(c0 > 0.0) {
        return Err(Error::InvalidParameter(format!("C0 must be positive, got {c0}")));
    }
    let alpha = alpha_of(params);
    let ln_b = params.pe() * (1.0 + alpha) * 2f64.ln();
    let ln_upsilon = (params.n() + params.p) * alpha * (1.0 - sigma).ln();
    let ln_a = scale_factor_a(cylinder.rho, cylinder.theta, params.n_dim, params.p).ln();
    // ln Y0 = (1/alpha)(ln Upsilon - ln C0 - alpha ln A) + e_k ln k - ln b / alpha^2
    let constant = (ln_upsilon - c0.ln() - alpha * ln_a) / alpha - ln_b / (alpha * alpha);
    let e_k = params.n() * (params.q() - params.pe()) / params.p;
    Ok((constant, e_k))
}

/// The `Y_0` that level `k` makes critical: the right side of the equality
/// that defines `k`.
pub fn threshold_y0(k: f64, params: &StructureParams, sigma: f64, cylinder: Cylinder, c0: f64) -> Result<f64> {
    let (constant, e_k) = ln_threshold_factor(params, sigma, cylinder, c0)?;
    Ok((constant + e_k * k.ln()).exp())
}

/// `ln k` solving the threshold equality; `-inf` when `Y_0 = 0`. Near the
/// edge of admissibility `k` itself can exceed the range of `f64`.
pub fn choose_ln_k(y0: f64, params: &StructureParams, sigma: f64, cylinder: Cylinder, c0: f64) -> Result<f64> {
    let (constant, e_k) = ln_threshold_factor(params, sigma, cylinder, c0)?;
    if !(y0 >= 0.0 && y0.is_finite()) {
        return Err(Error::InvalidParameter(format!("Y0 must be finite and >= 0, got {y0}")));
    }
    Ok((y0.ln() - constant) / e_k)
}

/// Solves the threshold equality for `k` without clamping; 0 when `Y_0 = 0`.
pub fn choose_k_unclamped(y0: f64, params: &StructureParams, sigma: f64, cylinder: Cylinder, c0: f64) -> Result<f64> {
    Ok(choose_ln_k(y0, params, sigma, cylinder, c0)?.exp())
}

/// Level `k >= 1` at which `Y_0` sits exactly at the lemma's threshold.
pub fn choose_k(y0: f64, params: &StructureParams, sigma: f64, cylinder: Cylinder, c0: f64) -> Result<f64> {
    Ok(choose_k_unclamped(y0, params, sigma, cylinder, c0)?.max(1.0))
}

/// `p (N+2) / (2 (p (N+2) - 2N))`.
pub fn thm1_exponent(p: f64, n_dim: usize) -> Result<f64> {
    let n = n_dim as f64;
    if p <= p_min_first_bound(n_dim) {
        return Err(Error::Range {
            p,
            reason: format!("need p > 2N/(N+2) = {}", p_min_first_bound(n_dim)),
        });
    }
    Ok(p * (n + 2.0) / (2.0 * (p * (n + 2.0) - 2.0 * n)))
}

/// A sup bound evaluated both before and after the cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub raw: f64,
    pub cap: f64,
}

impl BoundValue {
    pub fn capped(&self) -> f64 {
        self.raw.min(self.cap)
    }
}

pub fn thm1_bound(avg_pe: f64, p: f64, n_dim: usize, sigma: f64, cylinder: Cylinder, c: f64) -> Result<BoundValue> {
    let e = thm1_exponent(p, n_dim)?;
    check_sigma(sigma)?;
    let a = scale_factor_a(cylinder.rho, cylinder.theta, n_dim, p);
    let n = n_dim as f64;
    let raw = c * a.powf(e) / (1.0 - sigma).powf(e * (n + p)) * avg_pe.powf(e);
    Ok(BoundValue { raw, cap: 1.0 })
}

fn check_field(field: &SpaceTimeField, params: &StructureParams) -> Result<()> {
    if field.grid().dim() != params.n_dim {
        return Err(Error::Dimension {
            expected: params.n_dim,
            found: field.grid().dim(),
        });
    }
    Ok(())
}

/// `Y_i`: the average over `Q_i` of `(u - k_i)_+^{p+eps0}`.
pub fn compute_yi(
    field: &SpaceTimeField,
    schedule: &ShrinkSchedule,
    k: f64,
    params: &StructureParams,
    i: usize,
) -> Result<f64> {
    check_field(field, params)?;
    let grid = field.grid();
    let cyl = schedule.cylinder(i);
    cyl.check_fits(grid)?;
    let ki = level_schedule(k, i);
    let pe = params.pe();
    Ok(cyl.nodes(grid).average(|n, s| (field.at(n, s) - ki).max(0.0).powf(pe)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub i: usize,
    pub rho: f64,
    pub theta: f64,
    pub k: f64,
    pub y: f64,
    /// Recursion bound on `Y_{i+1}` with the run's `C0`.
    pub predicted: f64,
    /// `Y_{i+1}` over the recursion bound with `C0 = 1`; `None` when both vanish.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
}

impl IterationTrace {
    /// First index with `Y_i` below `tol`.
    pub fn decayed_below(&self, tol: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.y < tol).map(|r| r.i)
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max)
    }
}

/// Runs the iteration at level `k` and records every step.
pub fn iterate(
    field: &SpaceTimeField,
    schedule: &ShrinkSchedule,
    k: f64,
    params: &StructureParams,
    c0: f64,
) -> Result<IterationTrace> {
    let consts = RecursionConstants::new(params, schedule.sigma, schedule.base, k, c0)?;
    let unit = RecursionConstants { c0: 1.0, ..consts };
    let ys: Vec<f64> = (0..=MAX_STEPS + 1)
        .map(|i| compute_yi(field, schedule, k, params, i))
        .collect::<Result<_>>()?;
    let rows = (0..=MAX_STEPS)
        .map(|i| {
            let r = schedule.radii(i);
            let (y, next) = (ys[i], ys[i + 1]);
            let bound = recursion_rhs(y, &unit, params, k, i);
            let ratio = if next == 0.0 {
                (y > 0.0).then_some(0.0)
            } else {
                Some(next / bound)
            };
            TraceRow {
                i,
                rho: r.rho,
                theta: r.theta,
                k: level_schedule(k, i),
                y,
                predicted: recursion_rhs(y, &consts, params, k, i),
                ratio,
            }
        })
        .collect();
    Ok(IterationTrace { rows })
}

/// Multiples of the cylinder maximum used to calibrate `C0`.
pub const CALIBRATION_LEVELS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

/// `C0` as the largest observed step ratio over a ladder of levels around
/// the field's maximum, floored at 1.
pub fn calibrate_c0(field: &SpaceTimeField, schedule: &ShrinkSchedule, params: &StructureParams) -> Result<f64> {
    let top = schedule.base.nodes(field.grid()).max(field);
    let mut c0: f64 = 1.0;
    if top > 0.0 {
        for m in CALIBRATION_LEVELS {
            c0 = c0.max(iterate(field, schedule, m * top, params, 1.0)?.max_ratio());
        }
    }
    Ok(c0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeGiorgiReport {
    pub trace: IterationTrace,
    pub k: f64,
    pub y0: f64,
    pub c0: f64,
    /// Largest step ratio seen at the chosen `k`.
    pub max_ratio: f64,
    pub sup_inner: f64,
    pub satisfied: bool,
    pub threshold: f64,
}

/// End to end: calibrate (or take) `C0`, choose `k`, run the iteration at
/// `k`, and compare with the maximum over `Q_{sigma rho, sigma theta}`.
pub fn verify_degiorgi(
    field: &SpaceTimeField,
    params: &StructureParams,
    sigma: f64,
    cylinder: Cylinder,
    c0: Option<f64>,
) -> Result<DeGiorgiReport> {
    check_field(field, params)?;
    params.require_admissible()?;
    field.require_nonnegative(1e-8)?;
    let schedule = ShrinkSchedule::new(sigma, cylinder)?;
    cylinder.check_fits(field.grid())?;
    let c0 = match c0 {
        Some(c) => c,
        None => calibrate_c0(field, &schedule, params)?,
    };
    let y0 = compute_yi(field, &schedule, 1.0, params, 0)?;
    let k = choose_k(y0, params, sigma, cylinder, c0)?;
    report_at(field, params, &schedule, k, y0, c0)
}

/// Same as [`verify_degiorgi`] at a caller-chosen level.
pub fn verify_at_level(
    field: &SpaceTimeField,
    params: &StructureParams,
    sigma: f64,
    cylinder: Cylinder,
    k: f64,
    c0: f64,
) -> Result<DeGiorgiReport> {
    check_field(field, params)?;
    let schedule = ShrinkSchedule::new(sigma, cylinder)?;
    cylinder.check_fits(field.grid())?;
    let y0 = compute_yi(field, &schedule, k, params, 0)?;
    report_at(field, params, &schedule, k, y0, c0)
}

fn report_at(
    field: &SpaceTimeField,
    params: &StructureParams,
    schedule: &ShrinkSchedule,
    k: f64,
    y0: f64,
    c0: f64,
) -> Result<DeGiorgiReport> {
    let trace = iterate(field, schedule, k, params, c0)?;
    let sup_inner = schedule.limit().nodes(field.grid()).max(field);
    let threshold = threshold_y0(k, params, schedule.sigma, schedule.base, c0)?;
    Ok(DeGiorgiReport {
        max_ratio: trace.max_ratio(),
        trace,
        k,
        y0,
        c0,
        sup_inner,
        satisfied: sup_inner <= k,
        threshold,
    })
}
