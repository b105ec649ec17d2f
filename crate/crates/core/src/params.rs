//! Structure parameters `(N, p, Lambda0, Lambda1, eps0)` and the exponents
//! derived from them.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureParams {
    pub n_dim: usize,
    pub p: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub eps0: f64,
}

impl StructureParams {
    pub fn new(n_dim: usize, p: f64, lambda0: f64, lambda1: f64, eps0: f64) -> Result<Self> {
        if n_dim == 0 {
            return Err(Error::InvalidParameter("N must be positive".into()));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
        }
        if !(lambda0 > 0.0 && lambda0 <= lambda1 && lambda1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < Lambda0 <= Lambda1, got {lambda0}, {lambda1}"
            )));
        }
        if !(eps0 >= 0.0 && eps0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps0 must be non-negative, got {eps0}"
            )));
        }
        Ok(StructureParams {
            n_dim,
            p,
            lambda0,
            lambda1,
            eps0,
        })
    }

    /// Parameters for the first bound: `eps0 = 4 / (N + 2)`, unit coefficient bounds.
    pub fn first_bound(n_dim: usize, p: f64) -> Result<Self> {
        StructureParams::new(n_dim, p, 1.0, 1.0, eps0_first_bound(n_dim))
    }

    /// Parameters for the second bound: `eps0 = 2 / (N + 1)`, unit coefficient bounds.
    pub fn second_bound(n_dim: usize, p: f64) -> Result<Self> {
        StructureParams::new(n_dim, p, 1.0, 1.0, eps0_second_bound(n_dim))
    }

    pub fn with_eps0(self, eps0: f64) -> Self {
        StructureParams { eps0, ..self }
    }

    pub fn n(&self) -> f64 {
        self.n_dim as f64
    }

    /// Parabolic Sobolev exponent `q = p (N + 2) / N`.
    pub fn q(&self) -> f64 {
        self.p * (self.n() + 2.0) / self.n()
    }

    /// `p + eps0`, the integrability exponent driving the iteration.
    pub fn pe(&self) -> f64 {
        self.p + self.eps0
    }

    /// `q > p + eps0` and `p + eps0 > 2`.
    pub fn is_admissible(&self) -> bool {
        self.q() > self.pe() && self.pe() > 2.0
    }

    pub fn require_admissible(&self) -> Result<()> {
        if self.pe() <= 2.0 {
            return Err(Error::Admissibility(format!("p + eps0 = {} must exceed 2", self.pe())));
        }
        if self.q() <= self.pe() {
            return Err(Error::Admissibility(format!(
                "q = {} must exceed p + eps0 = {}",
                self.q(),
                self.pe()
            )));
        }
        Ok(())
    }
}

pub fn eps0_first_bound(n_dim: usize) -> f64 {
    4.0 / (n_dim as f64 + 2.0)
}

pub fn eps0_second_bound(n_dim: usize) -> f64 {
    2.0 / (n_dim as f64 + 1.0)
}

/// Lower end `2N / (N + 2)` of the p-range of the first bound.
pub fn p_min_first_bound(n_dim: usize) -> f64 {
    let n = n_dim as f64;
    2.0 * n / (n + 2.0)
}

/// Lower end `2N / (N + 1)` of the p-range of the second bound.
pub fn p_min_second_bound(n_dim: usize) -> f64 {
    let n = n_dim as f64;
    2.0 * n / (n + 1.0)
}

/// Intrinsic scaling factor `(theta / rho^p) + (rho^p / theta)^(N / p)`.
pub fn scale_factor_a(rho: f64, theta: f64, n_dim: usize, p: f64) -> f64 {
    let rp = rho.powf(p);
    theta / rp + (rp / theta).powf(n_dim as f64 / p)
}
