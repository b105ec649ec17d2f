//! Truncations `(u - k)_+`, superlevel sets and the pointwise inequalities
//! that move between them along the level ladder.

use crate::cylinder::Cylinder;
use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;
use crate::params::StructureParams;
use crate::schedule::{level_schedule, ShrinkSchedule};

/// `(u - k)_+` together with the field and level it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedField {
    pub base: SpaceTimeField,
    pub level: f64,
    pub values: SpaceTimeField,
}

pub fn truncate(field: &SpaceTimeField, k: f64) -> Result<TruncatedField> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "truncation level must be >= 0, got {k}"
        )));
    }
    Ok(TruncatedField {
        base: field.clone(),
        level: k,
        values: field.map(|u| (u - k).max(0.0))?,
    })
}

/// `{u > k}` restricted to a cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperlevelSet {
    pub cylinder: Cylinder,
    pub level: f64,
    pub measure: f64,
    /// One flag per stored value, false outside the cylinder.
    pub indicator: Vec<bool>,
}

pub fn superlevel_set(field: &SpaceTimeField, cylinder: Cylinder, k: f64) -> Result<SuperlevelSet> {
    let grid = field.grid();
    cylinder.check_fits(grid)?;
    let nodes = cylinder.nodes(grid);
    let mut indicator = vec![false; field.values().len()];
    for n in nodes.levels.clone() {
        for &s in &nodes.spatial {
            indicator[n * grid.n_space() + s] = field.at(n, s) > k;
        }
    }
    let measure = nodes.measure_where(|n, s| indicator[n * grid.n_space() + s]);
    Ok(SuperlevelSet {
        cylinder,
        level: k,
        measure,
        indicator,
    })
}

/// Left and right side of an inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    /// `lhs / rhs`, taking `0 / 0` as 0.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }

    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel_tol)
    }
}

fn check_level(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("level k must be positive, got {k}")))
    }
}

/// `|A_{i+1}|` on `Q_{i+1}` against `(2^{s(i+1)} / k^s) * int_{Q_i} (u - k_i)_+^s`.
pub fn measure_bound_check(
    field: &SpaceTimeField,
    schedule: &ShrinkSchedule,
    k: f64,
    i: usize,
    s: f64,
) -> Result<Sides> {
    check_level(k)?;
    if !(s >= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent s must be >= 1, got {s}")));
    }
    let grid = field.grid();
    schedule.base.check_fits(grid)?;
    let (ki, kn) = (level_schedule(k, i), level_schedule(k, i + 1));
    let lhs = schedule
        .cylinder(i + 1)
        .nodes(grid)
        .measure_where(|n, x| field.at(n, x) > kn);
    let integral = schedule
        .cylinder(i)
        .nodes(grid)
        .integrate(|n, x| (field.at(n, x) - ki).max(0.0).powf(s));
    let rhs = 2f64.powf(s * (i + 1) as f64) / k.powf(s) * integral;
    Ok(Sides { lhs, rhs })
}

// both chains: int_{Q_i} (u - k_{i+1})_+^a <= (2^{g(i+1)} / k^g) int_{Q_i} (u - k_i)_+^{p+eps0}
fn chain(field: &SpaceTimeField, schedule: &ShrinkSchedule, k: f64, i: usize, a: f64, pe: f64) -> Result<Sides> {
    check_level(k)?;
    let grid = field.grid();
    schedule.base.check_fits(grid)?;
    let g = pe - a;
    let (ki, kn) = (level_schedule(k, i), level_schedule(k, i + 1));
    let nodes = schedule.cylinder(i).nodes(grid);
    let lhs = nodes.integrate(|n, x| (field.at(n, x) - kn).max(0.0).powf(a));
    let integral = nodes.integrate(|n, x| (field.at(n, x) - ki).max(0.0).powf(pe));
    let rhs = 2f64.powf(g * (i + 1) as f64) / k.powf(g) * integral;
    Ok(Sides { lhs, rhs })
}

fn check_dim(field: &SpaceTimeField, params: &StructureParams) -> Result<()> {
    if field.grid().dim() != params.n_dim {
        return Err(Error::Dimension {
            expected: params.n_dim,
            found: field.grid().dim(),
        });
    }
    Ok(())
}

/// `int_{Q_i} (u - k_{i+1})_+^p` against `(2^{eps0(i+1)} / k^eps0) int_{Q_i} (u - k_i)_+^{p+eps0}`.
pub fn holder_p_chain(
    field: &SpaceTimeField,
    schedule: &ShrinkSchedule,
    k: f64,
    i: usize,
    params: &StructureParams,
) -> Result<Sides> {
    check_dim(field, params)?;
    params.require_admissible()?;
    chain(field, schedule, k, i, params.p, params.pe())
}

/// `int_{Q_i} (u - k_{i+1})_+^2` against `(2^{(p+eps0-2)(i+1)} / k^{p+eps0-2}) int_{Q_i} (u - k_i)_+^{p+eps0}`.
pub fn holder_2_chain(
    field: &SpaceTimeField,
    schedule: &ShrinkSchedule,
    k: f64,
    i: usize,
    params: &StructureParams,
) -> Result<Sides> {
    check_dim(field, params)?;
    if params.pe() <= 2.0 {
        return Err(Error::Admissibility(format!(
            "p + eps0 = {} must exceed 2",
            params.pe()
        )));
    }
    chain(field, schedule, k, i, 2.0, params.pe())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::random::rough_nonnegative;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid {
        Grid::new(1, 1.0, 41, 40, 0.05).unwrap()
    }

    fn schedule() -> ShrinkSchedule {
        ShrinkSchedule::new(0.5, Cylinder::new(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn truncate_examples() {
        let g = Grid::new(1, 1.0, 3, 1, 0.1).unwrap();
        let f = SpaceTimeField::new(g, vec![1.0, 3.0, 5.0, 1.0, 3.0, 5.0]).unwrap();
        let t = truncate(&f, 2.0).unwrap();
        assert_eq!(t.values.values(), &[0.0, 1.0, 3.0, 0.0, 1.0, 3.0]);
        assert_eq!(truncate(&f, 0.0).unwrap().values, f);
        assert!(truncate(&f, 5.0).unwrap().values.values().iter().all(|&v| v == 0.0));
        assert!(truncate(&f, -1.0).is_err());
    }

    #[test]
    fn superlevel_uses_strict_inequality() {
        let g = grid();
        let f = SpaceTimeField::from_fn(g, |_, _| 2.0).unwrap();
        let cyl = Cylinder::new(0.5, 0.5).unwrap();
        assert_eq!(superlevel_set(&f, cyl, 2.0).unwrap().measure, 0.0);
        let set = superlevel_set(&f, cyl, 1.0).unwrap();
        let nodes = cyl.nodes(&g);
        let expected = (nodes.spatial.len() * nodes.levels.len()) as f64 * nodes.weight;
        assert!((set.measure - expected).abs() < 1e-14);
        assert!(set.measure <= cyl.measure(1) * 1.2);
    }

    #[test]
    fn zero_field_gives_zero_sides() {
        let f = SpaceTimeField::zeros(grid());
        let params = StructureParams::first_bound(1, 2.0).unwrap();
        for i in 0..5 {
            assert_eq!(
                measure_bound_check(&f, &schedule(), 1.0, i, 2.0).unwrap(),
                Sides { lhs: 0.0, rhs: 0.0 }
            );
            assert_eq!(holder_p_chain(&f, &schedule(), 1.0, i, &params).unwrap().lhs, 0.0);
            assert_eq!(holder_2_chain(&f, &schedule(), 1.0, i, &params).unwrap().rhs, 0.0);
        }
    }

    #[test]
    fn constant_field_at_level_k() {
        // u = k: lhs = |Q_{i+1}|, rhs = 2^s |Q_i| in node measure
        let g = grid();
        let k = 3.0;
        let f = SpaceTimeField::from_fn(g, |_, _| k).unwrap();
        let sch = schedule();
        for i in 0..4 {
            for &s in &[1.0, 2.0, 2.7] {
                let sides = measure_bound_check(&f, &sch, k, i, s).unwrap();
                let qi = sch.cylinder(i).nodes(&g).measure_where(|_, _| true);
                let qn = sch.cylinder(i + 1).nodes(&g).measure_where(|_, _| true);
                assert!((sides.lhs - qn).abs() < 1e-12);
                assert!((sides.rhs - 2f64.powf(s) * qi).abs() < 1e-9 * sides.rhs);
            }
        }
    }

    #[test]
    fn chains_on_constant_field_2k() {
        // u = 2k: (u - k_j) = k (1 + 2^-j) in closed form
        let g = grid();
        let (k, p) = (1.5, 2.5);
        let params = StructureParams::first_bound(1, p).unwrap();
        let e = params.eps0;
        let f = SpaceTimeField::from_fn(g, |_, _| 2.0 * k).unwrap();
        let sch = schedule();
        for i in 0..4 {
            let m = sch.cylinder(i).nodes(&g).measure_where(|_, _| true);
            let a = k * (1.0 + 0.5f64.powi(i as i32 + 1));
            let b = k * (1.0 + 0.5f64.powi(i as i32));
            let pc = holder_p_chain(&f, &sch, k, i, &params).unwrap();
            assert!((pc.lhs - a.powf(p) * m).abs() < 1e-10 * pc.lhs);
            let rhs = 2f64.powf(e * (i + 1) as f64) / k.powf(e) * b.powf(p + e) * m;
            assert!((pc.rhs - rhs).abs() < 1e-10 * rhs);
            assert!(pc.holds(0.0));
            let tc = holder_2_chain(&f, &sch, k, i, &params).unwrap();
            assert!((tc.lhs - a * a * m).abs() < 1e-10 * tc.lhs);
            assert!(tc.holds(0.0));
        }
    }

    #[test]
    fn chains_reject_inadmissible_exponents() {
        let f = SpaceTimeField::zeros(grid());
        let bad = StructureParams::first_bound(1, 1.5).unwrap().with_eps0(0.25);
        assert!(matches!(
            holder_2_chain(&f, &schedule(), 1.0, 0, &bad),
            Err(Error::Admissibility(_))
        ));
        assert!(matches!(
            holder_p_chain(&f, &schedule(), 1.0, 0, &bad),
            Err(Error::Admissibility(_))
        ));
        let wrong_dim = StructureParams::first_bound(2, 2.0).unwrap();
        assert!(matches!(
            holder_p_chain(&f, &schedule(), 1.0, 0, &wrong_dim),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn invalid_arguments() {
        let f = SpaceTimeField::zeros(grid());
        assert!(measure_bound_check(&f, &schedule(), 0.0, 0, 2.0).is_err());
        assert!(measure_bound_check(&f, &schedule(), 1.0, 0, 0.5).is_err());
        let big = ShrinkSchedule::new(0.5, Cylinder::new(2.0, 1.0).unwrap()).unwrap();
        assert!(matches!(
            measure_bound_check(&f, &big, 1.0, 0, 2.0),
            Err(Error::CylinderOutOfGrid { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn truncation_is_monotone_in_level(seed in any::<u64>(), k1 in 0.0f64..5.0, dk in 0.0f64..5.0) {
            let f = rough_nonnegative(&grid(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let a = truncate(&f, k1).unwrap();
            let b = truncate(&f, k1 + dk).unwrap();
            for (x, y) in a.values.values().iter().zip(b.values.values()) {
                prop_assert!(x >= y && *y >= 0.0);
            }
        }

        #[test]
        fn inequalities_hold_on_random_fields(seed in any::<u64>(), k in 0.05f64..8.0, p in 1.9f64..3.0) {
            let f = rough_nonnegative(&grid(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let params = StructureParams::first_bound(1, p).unwrap();
            for i in 0..=6 {
                for s in [1.0, 2.0, p] {
                    prop_assert!(measure_bound_check(&f, &schedule(), k, i, s).unwrap().holds(1e-12));
                }
                prop_assert!(holder_p_chain(&f, &schedule(), k, i, &params).unwrap().holds(1e-10));
                prop_assert!(holder_2_chain(&f, &schedule(), k, i, &params).unwrap().holds(1e-10));
            }
        }
    }
}
