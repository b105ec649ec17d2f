//! Cutoff functions, both sides of the local energy (Caccioppoli) estimate,
//! and both sides of the parabolic Sobolev embedding.

use crate::cylinder::Cylinder;
use crate::error::{Error, Result};
use crate::grid::{norm, slice_gradient, Grid, Point, SpaceTimeField};
use crate::levelset::Sides;
use crate::params::StructureParams;
use crate::schedule::{level_schedule, ShrinkSchedule};

/// Lateral boundary tolerance for [`sobolev_sides`].
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffKind {
    /// 1 on the intermediate cylinder, 0 on the parabolic boundary of `Q_i`.
    Full,
    /// 1 on `Q_{i+1}`, 0 on the lateral boundary of the intermediate
    /// cylinder, constant in time.
    Lateral,
}

/// Product of a radial ramp and a ramp in time, each a clamped cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub inner: Cylinder,
    pub outer: Cylinder,
    pub kind: CutoffKind,
}

// 3s^2 - 2s^3 on [0, 1], clamped
fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

fn smoothstep_slope(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        6.0 * s * (1.0 - s)
    }
}

pub fn build_cutoff(schedule: &ShrinkSchedule, i: usize, kind: CutoffKind, grid: &Grid) -> Result<Cutoff> {
    let (inner, outer) = match kind {
        CutoffKind::Full => (schedule.tilde_cylinder(i), schedule.cylinder(i)),
        CutoffKind::Lateral => (schedule.cylinder(i + 1), schedule.tilde_cylinder(i)),
    };
    let band = outer.rho - inner.rho;
    if band < 2.0 * grid.h() {
        return Err(Error::GridTooCoarse {
            band,
            spacing: grid.h(),
        });
    }
    if kind == CutoffKind::Full {
        let band = outer.theta - inner.theta;
        if band < 2.0 * grid.dt() {
            return Err(Error::GridTooCoarse {
                band,
                spacing: grid.dt(),
            });
        }
    }
    Ok(Cutoff { inner, outer, kind })
}

impl Cutoff {
    fn space_arg(&self, r: f64) -> f64 {
        (self.outer.rho - r) / (self.outer.rho - self.inner.rho)
    }

    fn time_arg(&self, t: f64) -> f64 {
        (t + self.outer.theta) / (self.outer.theta - self.inner.theta)
    }

    fn time_factor(&self, t: f64) -> f64 {
        if t > self.outer.theta {
            return 0.0;
        }
        match self.kind {
            CutoffKind::Full => smoothstep(self.time_arg(t)),
            CutoffKind::Lateral => 1.0,
        }
    }

    pub fn value(&self, x: Point, t: f64) -> f64 {
        smoothstep(self.space_arg(norm(x))) * self.time_factor(t)
    }

    /// Analytic spatial gradient.
    pub fn gradient(&self, x: Point, t: f64) -> Point {
        let r = norm(x);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let d = -smoothstep_slope(self.space_arg(r)) / (self.outer.rho - self.inner.rho) * self.time_factor(t);
        [d * x[0] / r, d * x[1] / r]
    }

    /// Analytic time derivative.
    pub fn time_derivative(&self, x: Point, t: f64) -> f64 {
        match self.kind {
            CutoffKind::Lateral => 0.0,
            CutoffKind::Full => {
                if t > self.outer.theta {
                    return 0.0;
                }
                smoothstep(self.space_arg(norm(x))) * smoothstep_slope(self.time_arg(t))
                    / (self.outer.theta - self.inner.theta)
            }
        }
    }

    /// Largest `|grad zeta|` and `|d_t zeta|` over the grid nodes. The cutoff
    /// is a product, so space and time are scanned separately.
    pub fn sampled_slopes(&self, grid: &Grid) -> (f64, f64) {
        let (mut g_space, mut v_space): (f64, f64) = (0.0, 0.0);
        for s in 0..grid.n_space() {
            let x = grid.coords(s);
            g_space = g_space.max(norm(self.gradient(x, 0.0)));
            v_space = v_space.max(self.value(x, 0.0));
        }
        let (mut v_time, mut d_time): (f64, f64) = (0.0, 0.0);
        for n in 0..grid.n_levels() {
            let t = grid.time(n);
            v_time = v_time.max(self.time_factor(t));
            d_time = d_time.max(self.time_derivative([0.0, 0.0], t).abs());
        }
        (g_space * v_time, d_time * v_space)
    }

    /// Profile slope bounds `1.5 / band` in space and time.
    pub fn slope_bounds(&self) -> (f64, f64) {
        let time = match self.kind {
            CutoffKind::Full => 1.5 / (self.outer.theta - self.inner.theta),
            CutoffKind::Lateral => 0.0,
        };
        (1.5 / (self.outer.rho - self.inner.rho), time)
    }
}

/// The four terms of the energy estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaccioppoliSides {
    pub lhs_sup: f64,
    pub lhs_grad: f64,
    pub rhs_space: f64,
    pub rhs_time: f64,
}

impl CaccioppoliSides {
    pub fn lhs(&self) -> f64 {
        self.lhs_sup + self.lhs_grad
    }

    pub fn rhs(&self) -> f64 {
        self.rhs_space + self.rhs_time
    }

    /// `lhs / rhs`, or `None` when the right side vanishes.
    pub fn fitted_constant(&self) -> Option<f64> {
        (self.rhs() > 0.0).then(|| self.lhs() / self.rhs())
    }
}

fn truncated_slice(u: &[f64], k: f64) -> Vec<f64> {
    u.iter().map(|&v| (v - k).max(0.0)).collect()
}

pub fn caccioppoli_sides(field: &SpaceTimeField, p: f64, k: f64, cutoff: &Cutoff) -> Result<CaccioppoliSides> {
    if !(k >= 0.0) {
        return Err(Error::InvalidParameter(format!("level k must be >= 0, got {k}")));
    }
    let grid = field.grid();
    cutoff.outer.check_fits(grid)?;
    let nodes = cutoff.outer.nodes(grid);
    let w_space = grid.h().powi(grid.dim() as i32);
    let mut out = CaccioppoliSides {
        lhs_sup: 0.0,
        lhs_grad: 0.0,
        rhs_space: 0.0,
        rhs_time: 0.0,
    };
    for n in nodes.levels.clone() {
        let t = grid.time(n);
        let v = truncated_slice(field.slice(n), k);
        let mut slice_mass = 0.0;
        for &s in &nodes.spatial {
            let x = grid.coords(s);
            let z = cutoff.value(x, t);
            let vs = v[s];
            slice_mass += vs * vs * z * z;
            out.lhs_grad += norm(slice_gradient(grid, &v, s)).powf(p) * z.powf(p);
            out.rhs_space += vs.powf(p) * norm(cutoff.gradient(x, t)).powf(p);
            out.rhs_time += vs * vs * z.powf(p - 1.0) * cutoff.time_derivative(x, t).abs();
        }
        out.lhs_sup = out.lhs_sup.max(slice_mass * w_space);
    }
    out.lhs_grad *= nodes.weight;
    out.rhs_space *= nodes.weight;
    out.rhs_time *= nodes.weight;
    Ok(out)
}

/// `int |u|^q` against `(sup_t int u^2)^{p/N} * int |grad u|^p` over the whole grid.
pub fn sobolev_sides(field: &SpaceTimeField, p: f64) -> Result<Sides> {
    let grid = field.grid();
    let n_dim = grid.dim() as f64;
    let q = p * (n_dim + 2.0) / n_dim;
    let mut worst: f64 = 0.0;
    for n in 0..grid.n_levels() {
        for s in (0..grid.n_space()).filter(|&s| grid.is_boundary(s)) {
            worst = worst.max(field.at(n, s).abs());
        }
    }
    if worst > BOUNDARY_TOL {
        return Err(Error::Boundary(worst));
    }
    let w_space = grid.h().powi(grid.dim() as i32);
    let (mut lhs, mut sup_mass, mut grad) = (0.0, 0.0f64, 0.0);
    for n in 0..grid.n_levels() {
        let u = field.slice(n);
        let mut mass = 0.0;
        for s in 0..grid.n_space() {
            lhs += u[s].abs().powf(q);
            mass += u[s] * u[s];
            grad += norm(slice_gradient(grid, u, s)).powf(p);
        }
        sup_mass = sup_mass.max(mass * w_space);
    }
    let w = grid.cell_volume();
    Ok(Sides {
        lhs: lhs * w,
        rhs: sup_mass.powf(p / n_dim) * grad * w,
    })
}

/// Energy of `(u - k_{i+1})_+` on the intermediate cylinder against the
/// cutoff-free bound in terms of `int_{Q_i} (u - k_i)_+^{p+eps0}`, with the
/// constant set to 1.
pub fn combined_energy_bound(
    field: &SpaceTimeField,
    schedule: &ShrinkSchedule,
    k: f64,
    i: usize,
    params: &StructureParams,
) -> Result<Sides> {
    params.require_admissible()?;
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("level k must be positive, got {k}")));
    }
    let grid = field.grid();
    schedule.base.check_fits(grid)?;
    let (p, pe, e) = (params.p, params.pe(), params.eps0);
    let (ki, kn) = (level_schedule(k, i), level_schedule(k, i + 1));
    let r = schedule.radii(i);

    // sup over t in [-theta~_i, theta_i] on the intermediate ball, where the cutoff is 1
    let tilde = schedule.tilde_cylinder(i);
    let ball = tilde.spatial_nodes(grid);
    let w_space = grid.h().powi(grid.dim() as i32);
    let mut lhs_sup: f64 = 0.0;
    for n in 0..grid.n_levels() {
        let t = grid.time(n);
        if t < -r.theta_tilde * (1.0 + 1e-12) || t > r.theta * (1.0 + 1e-12) {
            continue;
        }
        let v = field.slice(n);
        let mass: f64 = ball.iter().map(|&s| (v[s] - kn).max(0.0).powi(2)).sum();
        lhs_sup = lhs_sup.max(mass * w_space);
    }
    let tn = tilde.nodes(grid);
    let mut lhs_grad = 0.0;
    for n in tn.levels.clone() {
        let v = truncated_slice(field.slice(n), kn);
        for &s in &tn.spatial {
            lhs_grad += norm(slice_gradient(grid, &v, s)).powf(p);
        }
    }
    lhs_grad *= tn.weight;

    let integral = schedule
        .cylinder(i)
        .nodes(grid)
        .integrate(|n, s| (field.at(n, s) - ki).max(0.0).powf(pe));
    let base = schedule.base;
    let factor = 2f64.powf((i + 2) as f64 * pe) / (1.0 - schedule.sigma).powf(p)
        * (1.0 / (base.rho.powf(p) * k.powf(e)) + 1.0 / (base.theta * k.powf(pe - 2.0)));
    Ok(Sides {
        lhs: lhs_sup + lhs_grad,
        rhs: factor * integral,
    })
}

/// Largest `lhs / rhs` over pairs with a positive right side.
pub fn fit_constant<'a>(sides: impl IntoIterator<Item = &'a Sides>) -> Option<f64> {
    sides
        .into_iter()
        .filter(|s| s.rhs > 0.0)
        .map(|s| s.lhs / s.rhs)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::smooth_zero_boundary;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn schedule(sigma: f64) -> ShrinkSchedule {
        ShrinkSchedule::new(sigma, Cylinder::new(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn cutoff_is_one_inside_and_zero_on_parabolic_boundary() {
        let grid = Grid::new(2, 1.0, 81, 160, 0.0125).unwrap();
        let sch = schedule(0.5);
        let c = build_cutoff(&sch, 0, CutoffKind::Full, &grid).unwrap();
        assert_eq!(c.value([0.0, 0.0], 0.0), 1.0);
        assert_eq!(c.value([0.6, 0.3], 0.7), 1.0);
        assert_eq!(c.value([1.0, 0.0], 0.0), 0.0);
        assert_eq!(c.value([0.0, 0.0], -1.0), 0.0);
        // the top of the cylinder is not part of the parabolic boundary
        assert_eq!(c.value([0.0, 0.0], 1.0), 1.0);
        let lat = build_cutoff(&sch, 0, CutoffKind::Lateral, &grid).unwrap();
        assert_eq!(lat.value([0.0, 0.0], -1.0), 1.0);
        assert_eq!(lat.value([sch.tilde_cylinder(0).rho, 0.0], 0.0), 0.0);
        assert_eq!(lat.time_derivative([0.1, 0.0], 0.0), 0.0);
    }

    #[test]
    fn cutoff_slopes_within_profile_bounds() {
        let grid = Grid::new(1, 1.0, 4097, 4096, 1.0 / 2048.0).unwrap();
        for &sigma in &[0.25, 0.5, 0.75] {
            let sch = schedule(sigma);
            for i in 0..=8 {
                for kind in [CutoffKind::Full, CutoffKind::Lateral] {
                    let Ok(c) = build_cutoff(&sch, i, kind, &grid) else {
                        continue;
                    };
                    let (g, t) = c.sampled_slopes(&grid);
                    let band = (1.0 - sigma) / 2f64.powi(i as i32 + 2);
                    assert!(g <= 1.5 / band * (1.0 + 1e-12), "sigma={sigma} i={i}: {g}");
                    assert!(g >= 1.0 / band, "sampling should see the steep part");
                    if kind == CutoffKind::Full {
                        assert!(t <= 1.5 / band * (1.0 + 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let grid = Grid::new(1, 1.0, 11, 10, 0.2).unwrap();
        let err = build_cutoff(&schedule(0.5), 2, CutoffKind::Full, &grid).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
    }

    #[test]
    fn constant_below_level_gives_zero_terms() {
        let grid = Grid::new(1, 1.0, 101, 100, 0.02).unwrap();
        let f = SpaceTimeField::from_fn(grid, |_, _| 0.7).unwrap();
        let c = build_cutoff(&schedule(0.5), 0, CutoffKind::Full, &grid).unwrap();
        let s = caccioppoli_sides(&f, 2.0, 1.0, &c).unwrap();
        assert_eq!(
            s,
            CaccioppoliSides {
                lhs_sup: 0.0,
                lhs_grad: 0.0,
                rhs_space: 0.0,
                rhs_time: 0.0
            }
        );
        assert_eq!(s.fitted_constant(), None);
    }

    #[test]
    fn affine_profile_closed_form() {
        // u = 2 + x, k = 0, p = 2 on a 1D grid
        let grid = Grid::new(1, 1.0, 2001, 400, 0.005).unwrap();
        let f = SpaceTimeField::from_fn(grid, |x, _| 2.0 + x[0]).unwrap();
        let sch = schedule(0.5);
        let c = build_cutoff(&sch, 0, CutoffKind::Full, &grid).unwrap();
        let s = caccioppoli_sides(&f, 2.0, 0.0, &c).unwrap();
        // int zeta_x(x)^2 dx over [-1, 1] with inner radius 0.875; zeta_t^2 over [-1, 1]
        let (ri, ro, ti, to) = (c.inner.rho, c.outer.rho, c.inner.theta, c.outer.theta);
        let w = ro - ri;
        // int_0^1 smoothstep^2 = 13/35, int_0^1 smoothstep'^2 = 6/5
        let sx2 = 2.0 * (ri + w * 13.0 / 35.0);
        let st2 = (to - ti) * 13.0 / 35.0 + (ti + to);
        assert!(
            (s.lhs_grad - sx2 * st2).abs() < 2e-3 * s.lhs_grad,
            "{} vs {}",
            s.lhs_grad,
            sx2 * st2
        );
        // int (2 + x)^2 zeta_x'^2 dx: the ramps sit symmetric at |x| in [ri, ro]
        let n = 20000;
        let mut space = 0.0;
        for j in 0..n {
            let r = ri + (j as f64 + 0.5) / n as f64 * w;
            let d = smoothstep_slope((ro - r) / w) / w;
            space += ((2.0 + r).powi(2) + (2.0 - r).powi(2)) * d * d * w / n as f64;
        }
        let rhs_space = space * st2;
        assert!(
            (s.rhs_space - rhs_space).abs() < 2e-3 * rhs_space,
            "{} vs {}",
            s.rhs_space,
            rhs_space
        );
        assert!(s.fitted_constant().unwrap().is_finite());
    }

    #[test]
    fn sobolev_hat_closed_form() {
        // u(x, t) = (1 - |x| / a)_+ on [-1, 1], constant in time
        let a = 0.5;
        let p = 2.0;
        let grid = Grid::new(1, 1.0, 4001, 20, 0.05).unwrap();
        let f = SpaceTimeField::from_fn(grid, |x, _| (1.0 - x[0].abs() / a).max(0.0)).unwrap();
        let s = sobolev_sides(&f, p).unwrap();
        let span = grid.n_levels() as f64 * grid.dt();
        let q = 3.0 * p;
        let lhs = 2.0 * a / (q + 1.0) * span;
        let rhs = (2.0 * a / 3.0f64).powf(p) * (2.0 * a * a.powf(-p)) * span;
        assert!((s.lhs - lhs).abs() < 1e-3 * lhs, "{} vs {lhs}", s.lhs);
        assert!((s.rhs - rhs).abs() < 2e-3 * rhs, "{} vs {rhs}", s.rhs);
    }

    #[test]
    fn sobolev_rejects_nonzero_boundary() {
        let grid = Grid::new(1, 1.0, 11, 4, 0.1).unwrap();
        let f = SpaceTimeField::from_fn(grid, |_, _| 1.0).unwrap();
        assert!(matches!(sobolev_sides(&f, 2.0), Err(Error::Boundary(_))));
        assert_eq!(
            sobolev_sides(&SpaceTimeField::zeros(grid), 2.0).unwrap(),
            Sides { lhs: 0.0, rhs: 0.0 }
        );
    }

    #[test]
    fn sobolev_ratio_bounded_on_random_fields() {
        for &(dim, nx) in &[(1usize, 65usize), (2, 33)] {
            let grid = Grid::new(dim, 1.0, nx, 32, 1.0 / 32.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let sides: Vec<Sides> = (0..20)
                .map(|_| sobolev_sides(&smooth_zero_boundary(&grid, &mut rng, 3).unwrap(), 2.0).unwrap())
                .collect();
            let c = fit_constant(&sides).unwrap();
            assert!(c.is_finite() && c > 0.0);
        }
    }

    #[test]
    fn combined_bound_on_constant_field() {
        let grid = Grid::new(1, 1.0, 201, 200, 0.01).unwrap();
        let f = SpaceTimeField::from_fn(grid, |_, _| 3.0).unwrap();
        let params = StructureParams::first_bound(1, 2.0).unwrap();
        let s = combined_energy_bound(&f, &schedule(0.5), 2.0, 1, &params).unwrap();
        // no gradient; sup term is (3 - k_2)^2 times the node length of the ball
        let nodes = schedule(0.5).tilde_cylinder(1).spatial_nodes(&grid).len() as f64 * grid.h();
        assert!((s.lhs - 1.5f64.powi(2) * nodes).abs() < 1e-12);
        assert!(s.rhs > s.lhs);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn caccioppoli_terms_scale_homogeneously(seed in any::<u64>(), lambda in 0.1f64..10.0, p in 1.5f64..3.5) {
            let grid = Grid::new(1, 1.0, 65, 64, 1.0 / 32.0).unwrap();
            let f = smooth_zero_boundary(&grid, &mut ChaCha8Rng::seed_from_u64(seed), 3).unwrap().map(|v| v.abs()).unwrap();
            let c = build_cutoff(&schedule(0.5), 0, CutoffKind::Full, &grid).unwrap();
            let k = 0.3;
            let a = caccioppoli_sides(&f, p, k, &c).unwrap();
            let b = caccioppoli_sides(&f.scaled(lambda), p, lambda * k, &c).unwrap();
            let lp = lambda.powf(p);
            prop_assert!((b.lhs_grad - lp * a.lhs_grad).abs() <= 1e-10 * b.lhs_grad.max(1e-300));
            prop_assert!((b.rhs_space - lp * a.rhs_space).abs() <= 1e-10 * b.rhs_space.max(1e-300));
            prop_assert!((b.lhs_sup - lambda * lambda * a.lhs_sup).abs() <= 1e-10 * b.lhs_sup.max(1e-300));
        }
    }
}
