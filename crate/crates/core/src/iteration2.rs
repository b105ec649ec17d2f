//! The expanding-cylinder iteration on `M_n = sup_{Q_n} u`, the sup bound it
//! yields, the classical degenerate/singular bounds kept as comparators, and
//! the admissible range of `eps0`.

use crate::cylinder::Cylinder;
use crate::degiorgi::BoundValue;
use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;
use crate::params::{eps0_second_bound, p_min_first_bound, p_min_second_bound, scale_factor_a};
use crate::schedule::ExpandSchedule;

/// Number of recursion steps checked, `n = 0..=N_STEPS`.
pub const N_STEPS: usize = 8;

/// The three conditions on `eps0`: `p + eps0 > 2`, `2p > N eps0` and
/// `eps0 p < N (q - p - eps0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Eps0Conditions {
    pub positive_excess: bool,
    pub below_2p_over_n: bool,
    pub nu_below_one: bool,
}

impl Eps0Conditions {
    pub fn all(&self) -> bool {
        self.positive_excess && self.below_2p_over_n && self.nu_below_one
    }
}

pub fn eps0_admissible(p: f64, n_dim: usize, eps0: f64) -> Eps0Conditions {
    let n = n_dim as f64;
    let q = p * (n + 2.0) / n;
    Eps0Conditions {
        positive_excess: p + eps0 - 2.0 > 0.0,
        below_2p_over_n: 2.0 * p - n * eps0 > 0.0,
        nu_below_one: eps0 * p < n * (q - (p + eps0)),
    }
}

/// `M_n`: the maximum of `u` over the `n`-th expanding cylinder.
pub fn mn_value(field: &SpaceTimeField, schedule: &ExpandSchedule, n: usize) -> Result<f64> {
    let cyl = schedule.cylinder(n);
    cyl.check_fits(field.grid())?;
    Ok(cyl.nodes(field.grid()).max(field))
}

/// `1 / sigma^{N+1}`, the exact volume ratio `|Q_{rho,theta}| / |Q_{sigma rho, sigma theta}|`.
pub fn volume_ratio_bound(sigma: f64, n_dim: usize) -> Result<f64> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must lie in (0, 1], got {sigma}"
        )));
    }
    Ok(sigma.powi(-(n_dim as i32 + 1)))
}

fn check_second_range(p: f64, n_dim: usize) -> Result<()> {
    if p > p_min_second_bound(n_dim) {
        Ok(())
    } else {
        Err(Error::Range {
            p,
            reason: format!("need p > 2N/(N+1) = {}", p_min_second_bound(n_dim)),
        })
    }
}

/// `p (N+1) / (2N (p-1))`.
pub fn thm2_exponent(p: f64, n_dim: usize) -> Result<f64> {
    check_second_range(p, n_dim)?;
    let n = n_dim as f64;
    Ok(p * (n + 1.0) / (2.0 * n * (p - 1.0)))
}

pub fn thm2_bound(avg_p: f64, p: f64, n_dim: usize, sigma: f64, cylinder: Cylinder, c: f64) -> Result<BoundValue> {
    let e = thm2_exponent(p, n_dim)?;
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must lie in (0, 1), got {sigma}"
        )));
    }
    let n = n_dim as f64;
    let a = scale_factor_a(cylinder.rho, cylinder.theta, n_dim, p);
    let raw = c * a.powf(e) / (sigma.powf(e * (n + 1.0)) * (1.0 - sigma).powf(e * (n + p))) * avg_p.powf(e);
    Ok(BoundValue { raw, cap: 1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondIterationConstants {
    pub mu: f64,
    pub nu: f64,
    pub d: f64,
    pub eta: f64,
    pub bb: f64,
}

impl SecondIterationConstants {
    /// Constants for `eps0 = 2/(N+1)`, with `avg_p` the average of `u^p` over
    /// the outer cylinder and `c` the structural constant.
    pub fn new(p: f64, n_dim: usize, sigma: f64, cylinder: Cylinder, c: f64, avg_p: f64) -> Result<Self> {
        check_second_range(p, n_dim)?;
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must lie in (0, 1), got {sigma}"
            )));
        }
        let n = n_dim as f64;
        let eps0 = eps0_second_bound(n_dim);
        let q = p * (n + 2.0) / n;
        let gap = n * (q - (p + eps0));
        let mu = p / gap;
        let nu = eps0 * p / gap;
        let d = 2f64.powf(p * (n + p) / (gap - eps0 * p));
        let eta = 0.5 / d;
        let a = scale_factor_a(cylinder.rho, cylinder.theta, n_dim, p);
        let inner = c * a.powf(mu) / (sigma.powf(mu * (n + 1.0)) * (1.0 - sigma).powf(mu * (n + p))) * avg_p.powf(mu);
        let bb = eta.powf(-nu / (1.0 - nu)) * inner.powf(1.0 / (1.0 - nu));
        Ok(SecondIterationConstants { mu, nu, d, eta, bb })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondIterationReport {
    /// `M_0, ..., M_{N_STEPS + 1}`.
    pub m: Vec<f64>,
    /// Maximum over the outer cylinder.
    pub m_outer: f64,
    pub avg_p: f64,
    /// Constants with the caller's `C`.
    pub constants: SecondIterationConstants,
    /// Smallest `B` for which every checked step and the tail hold.
    pub bb_fit: f64,
    /// Geometric mean of the per-step requirements (least squares in log space).
    pub bb_lsq: Option<f64>,
    /// `C` reproducing `bb_fit`; `None` when `B` vanishes identically.
    pub c_fit: Option<f64>,
    /// `2 B d` with the fitted `B`.
    pub limit: f64,
    /// `M_0 <= limit + 1e-9`.
    pub dominated: bool,
    /// `M_n <= eta M_{n+1} + B_fit d^{n+1}` for every checked `n`.
    pub steps_hold: bool,
}

pub fn second_iteration(
    field: &SpaceTimeField,
    p: f64,
    sigma: f64,
    cylinder: Cylinder,
    c: f64,
) -> Result<SecondIterationReport> {
    let grid = field.grid();
    let n_dim = grid.dim();
    check_second_range(p, n_dim)?;
    cylinder.check_fits(grid)?;
    field.require_nonnegative(1e-8)?;
    let schedule = ExpandSchedule::new(sigma, cylinder)?;
    let nodes = cylinder.nodes(grid);
    let avg_p = nodes.average(|n, s| field.at(n, s).max(0.0).powf(p));
    let constants = SecondIterationConstants::new(p, n_dim, sigma, cylinder, c, avg_p)?;
    let unit = SecondIterationConstants::new(p, n_dim, sigma, cylinder, 1.0, avg_p)?;
    let m: Vec<f64> = (0..=N_STEPS + 1)
        .map(|n| mn_value(field, &schedule, n))
        .collect::<Result<_>>()?;
    let m_outer = nodes.max(field);
    let (d, eta) = (constants.d, constants.eta);

    let needs: Vec<f64> = (0..=N_STEPS)
        .map(|n| (m[n] - eta * m[n + 1]).max(0.0) / d.powi(n as i32 + 1))
        .collect();
    // what is left after N_STEPS + 1 steps is eta^{N_STEPS+1} M_{N_STEPS+1} <= B d 2^{-N_STEPS}
    let tail = m_outer / d.powi(N_STEPS as i32 + 2);
    let bb_fit = needs.iter().copied().fold(tail, f64::max);
    let positive: Vec<f64> = needs.iter().copied().filter(|&v| v > 0.0).collect();
    let bb_lsq =
        (!positive.is_empty()).then(|| (positive.iter().map(|v| v.ln()).sum::<f64>() / positive.len() as f64).exp());
    let c_fit = (unit.bb > 0.0).then(|| (bb_fit / unit.bb).powf(1.0 - unit.nu));
    let limit = 2.0 * bb_fit * d;
    let steps_hold = (0..=N_STEPS).all(|n| m[n] <= eta * m[n + 1] + bb_fit * d.powi(n as i32 + 1) * (1.0 + 1e-12));
    Ok(SecondIterationReport {
        dominated: m[0] <= limit + 1e-9,
        m,
        m_outer,
        avg_p,
        constants,
        bb_fit,
        bb_lsq,
        c_fit,
        limit,
        steps_hold,
    })
}

/// `lambda_r = N (p - 2) + r p`.
pub fn lambda_r(p: f64, n_dim: usize, r: f64) -> f64 {
    n_dim as f64 * (p - 2.0) + r * p
}

/// Default `r` of the singular comparator.
pub const DEFAULT_R: f64 = 2.0;
/// Default `eps` of the degenerate comparator.
pub const DEFAULT_EPS: f64 = 2.0;

/// Integrability power entering the classical bound that applies at `p`:
/// `p - 2 + eps` above 2, `r` below; `None` at `p = 2`.
pub fn classical_power(p: f64, r: f64, eps: f64) -> Option<f64> {
    if p > 2.0 {
        Some(p - 2.0 + eps)
    } else if p < 2.0 {
        Some(r)
    } else {
        None
    }
}

/// Exponents of the cap terms: `1/(p-2)` (degenerate, `p > 2`) and
/// `1/(2-p)` (singular, `p < 2`).
pub fn classical_exponents(p: f64) -> (Option<f64>, Option<f64>) {
    let deg = (p > 2.0).then(|| 1.0 / (p - 2.0));
    let sing = (p < 2.0).then(|| 1.0 / (2.0 - p));
    (deg, sing)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalBounds {
    pub deg: Result<BoundValue>,
    pub sing: Result<BoundValue>,
    /// `1 / |p - 2|`, infinite at `p = 2`.
    pub blowup: f64,
    pub lambda_r: f64,
}

/// Evaluates both classical bounds with constant `c`; `avg` is the average
/// of `u` raised to [`classical_power`].
pub fn classical_bounds(
    avg: f64,
    p: f64,
    n_dim: usize,
    sigma: f64,
    cylinder: Cylinder,
    r: f64,
    eps: f64,
    c: f64,
) -> Result<ClassicalBounds> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must lie in (0, 1), got {sigma}"
        )));
    }
    let n = n_dim as f64;
    let (rho, theta) = (cylinder.rho, cylinder.theta);
    let rp = rho.powf(p);
    let lam = lambda_r(p, n_dim, r);
    let deg = if p <= 2.0 {
        Err(Error::Range {
            p,
            reason: "degenerate bound needs p > 2".into(),
        })
    } else if !(eps > 0.0 && eps <= 2.0) {
        Err(Error::InvalidParameter(format!("eps must lie in (0, 2], got {eps}")))
    } else {
        Ok(BoundValue {
            raw: c * (theta / rp).powf(1.0 / eps) / (1.0 - sigma).powf((n + p) / eps) * avg.powf(1.0 / eps),
            cap: (rp / theta).powf(1.0 / (p - 2.0)),
        })
    };
    let sing = if !(p > 1.0 && p < 2.0) {
        Err(Error::Range {
            p,
            reason: "singular bound needs 1 < p < 2".into(),
        })
    } else if !(lam > 0.0 && r >= 1.0) {
        Err(Error::Range {
            p,
            reason: format!("need r >= 1 and lambda_r > 0, got r = {r}, lambda_r = {lam}"),
        })
    } else {
        Ok(BoundValue {
            raw: c * (rp / theta).powf(n / lam) / (1.0 - sigma).powf(p * (n + p) / lam) * avg.powf(p / lam),
            cap: (theta / rp).powf(1.0 / (2.0 - p)),
        })
    };
    Ok(ClassicalBounds {
        deg,
        sing,
        blowup: 1.0 / (p - 2.0).abs(),
        lambda_r: lam,
    })
}

/// `g(eps) = (2 - eps)^2 - N eps`.
pub fn g_eps(eps: f64, n_dim: usize) -> f64 {
    (2.0 - eps).powi(2) - n_dim as f64 * eps
}

/// Root of `g` in `[2/(N+1), 4/(N+2)]`: the smaller root of
/// `eps^2 - (4+N) eps + 4`, written without cancellation.
pub fn delta0_root(n_dim: usize) -> f64 {
    let n = n_dim as f64;
    8.0 / ((4.0 + n) + (n * n + 8.0 * n).sqrt())
}

/// The same root by bisection on `[2/(N+1), 4/(N+2)]`.
pub fn delta0_bisect(n_dim: usize, tol: f64) -> f64 {
    let (mut lo, mut hi) = (eps0_second_bound(n_dim), 4.0 / (n_dim as f64 + 2.0));
    if g_eps(lo, n_dim) <= 0.0 {
        return lo;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g_eps(mid, n_dim) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exponent arithmetic at one `(p, N)`; entries are `None` outside their range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentRow {
    pub p: f64,
    pub n_dim: usize,
    pub thm1: Option<f64>,
    pub thm2: Option<f64>,
    pub deg: Option<f64>,
    pub sing: Option<f64>,
    pub delta0: f64,
}

pub fn exponent_row(p: f64, n_dim: usize) -> ExponentRow {
    let (deg, sing) = classical_exponents(p);
    ExponentRow {
        p,
        n_dim,
        thm1: crate::degiorgi::thm1_exponent(p, n_dim).ok(),
        thm2: thm2_exponent(p, n_dim).ok(),
        deg,
        sing,
        delta0: delta0_root(n_dim),
    }
}

/// `2N/(N+2) < 2 - delta0 < 2N/(N+1)`.
pub fn delta0_bracket_holds(n_dim: usize) -> bool {
    let x = 2.0 - delta0_root(n_dim);
    p_min_first_bound(n_dim) < x && x < p_min_second_bound(n_dim)
}
