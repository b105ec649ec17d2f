//! Radii and level ladders for the two iterations.

use crate::cylinder::Cylinder;
use crate::error::{Error, Result};

/// Shrinking cylinders `Q_i` from `Q_{rho,theta}` down to `Q_{sigma rho, sigma theta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkSchedule {
    pub sigma: f64,
    pub base: Cylinder,
}

/// The four radii of step `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRadii {
    pub rho: f64,
    pub theta: f64,
    pub rho_tilde: f64,
    pub theta_tilde: f64,
}

impl ShrinkSchedule {
    pub fn new(sigma: f64, base: Cylinder) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must lie in (0, 1), got {sigma}"
            )));
        }
        Ok(ShrinkSchedule { sigma, base })
    }

    // written as r - (1 - sigma) r (1 - 2^-i) so that rho_0 == rho exactly
    fn radius(&self, r: f64, i: usize) -> f64 {
        r - (1.0 - self.sigma) * r * (1.0 - 1.0 / 2f64.powi(i as i32))
    }

    /// `rho_i`, `theta_i` and the intermediate radii `(rho_i + rho_{i+1}) / 2`.
    pub fn radii(&self, i: usize) -> StepRadii {
        let (r, t) = (self.base.rho, self.base.theta);
        StepRadii {
            rho: self.radius(r, i),
            theta: self.radius(t, i),
            rho_tilde: 0.5 * (self.radius(r, i) + self.radius(r, i + 1)),
            theta_tilde: 0.5 * (self.radius(t, i) + self.radius(t, i + 1)),
        }
    }

    /// `Q_i`.
    pub fn cylinder(&self, i: usize) -> Cylinder {
        let r = self.radii(i);
        Cylinder {
            rho: r.rho,
            theta: r.theta,
        }
    }

    /// The intermediate cylinder between `Q_{i+1}` and `Q_i`.
    pub fn tilde_cylinder(&self, i: usize) -> Cylinder {
        let r = self.radii(i);
        Cylinder {
            rho: r.rho_tilde,
            theta: r.theta_tilde,
        }
    }

    /// `Q_{sigma rho, sigma theta}`.
    pub fn limit(&self) -> Cylinder {
        Cylinder {
            rho: self.sigma * self.base.rho,
            theta: self.sigma * self.base.theta,
        }
    }
}

/// `k_i = k - k / 2^i`; `k_0 = 0` and `k_i -> k`.
pub fn level_schedule(k: f64, i: usize) -> f64 {
    k - k / 2f64.powi(i as i32)
}

/// Expanding cylinders from `Q_{sigma rho, sigma theta}` up to `Q_{rho,theta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpandSchedule {
    pub sigma: f64,
    pub base: Cylinder,
}

impl ExpandSchedule {
    pub fn new(sigma: f64, base: Cylinder) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must lie in (0, 1), got {sigma}"
            )));
        }
        Ok(ExpandSchedule { sigma, base })
    }

    fn radius(&self, r: f64, n: usize) -> f64 {
        // sum_{i=1..n} 2^-i = 1 - 2^-n
        self.sigma * r + (1.0 - self.sigma) * r * (1.0 - 1.0 / 2f64.powi(n as i32))
    }

    pub fn cylinder(&self, n: usize) -> Cylinder {
        Cylinder {
            rho: self.radius(self.base.rho, n),
            theta: self.radius(self.base.theta, n),
        }
    }

    pub fn limit(&self) -> Cylinder {
        self.base
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(sigma: f64) -> ShrinkSchedule {
        ShrinkSchedule::new(sigma, Cylinder::new(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn radii_examples() {
        let s = unit(0.5);
        let r0 = s.radii(0);
        assert_eq!((r0.rho, r0.theta), (1.0, 1.0));
        let r1 = s.radii(1);
        assert_eq!(r1.rho, 0.75);
        assert_eq!(r1.rho_tilde, 0.6875);
        assert!((s.radii(60).rho - 0.5).abs() < 1e-15);
    }

    #[test]
    fn level_examples() {
        assert_eq!(level_schedule(8.0, 0), 0.0);
        assert_eq!(level_schedule(8.0, 3), 7.0);
        assert!((level_schedule(8.0, 60) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn expand_schedule_endpoints() {
        let e = ExpandSchedule::new(0.25, Cylinder::new(2.0, 1.0).unwrap()).unwrap();
        assert_eq!(e.cylinder(0).rho, 0.5);
        assert!((e.cylinder(60).rho - 2.0).abs() < 1e-15);
        for n in 0..20 {
            assert!(e.cylinder(n + 1).rho > e.cylinder(n).rho);
        }
    }

    proptest! {
        #[test]
        fn radii_nest(sigma in 0.01f64..0.99, rho in 0.1f64..10.0) {
            let s = ShrinkSchedule::new(sigma, Cylinder::new(rho, 1.0).unwrap()).unwrap();
            for i in 0..=40 {
                let r = s.radii(i);
                let next = s.radii(i + 1).rho;
                prop_assert!(sigma * rho <= next * (1.0 + 1e-15));
                prop_assert!(next <= r.rho_tilde && r.rho_tilde <= r.rho);
                if i < 30 {
                    // strict while the geometric gap is representable
                    prop_assert!(next < r.rho_tilde && r.rho_tilde < r.rho);
                }
                prop_assert!(r.rho <= rho);
            }
        }

        #[test]
        fn levels_increase_to_k(k in 0.01f64..1e3) {
            for i in 0..40 {
                let (a, b) = (level_schedule(k, i), level_schedule(k, i + 1));
                prop_assert!(a < b && b < k);
            }
        }
    }
}
