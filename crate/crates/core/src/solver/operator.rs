//! Conservative discretization of `div(c (|grad u|^2 + delta^2)^((p-2)/2) grad u)`.
//!
//! Fluxes live on cell faces. The normal gradient on a face is the two-point
//! difference across it; in two dimensions the tangential component is the
//! mean of the centered differences at the face's two end nodes. The
//! divergence at an interior node is the difference of its opposite face
//! fluxes divided by `h`.

use crate::grid::{Grid, Point};

use super::banded::BandMatrix;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Face {
    /// Lower node.
    pub a: usize,
    /// Upper node, `a + stride`.
    pub b: usize,
    /// Offset of the tangential neighbours; zero in one dimension.
    pub tangent: usize,
}

/// Every face adjacent to at least one interior node.
pub(crate) fn faces(grid: &Grid) -> Vec<Face> {
    let nx = grid.nx();
    let mut out = Vec::new();
    match grid.dim() {
        1 => {
            for i in 0..nx - 1 {
                out.push(Face {
                    a: i,
                    b: i + 1,
                    tangent: 0,
                });
            }
        }
        _ => {
            for j in 1..nx - 1 {
                for i in 0..nx - 1 {
                    let a = j * nx + i;
                    out.push(Face {
                        a,
                        b: a + 1,
                        tangent: nx,
                    });
                }
            }
            for j in 0..nx - 1 {
                for i in 1..nx - 1 {
                    let a = j * nx + i;
                    out.push(Face {
                        a,
                        b: a + nx,
                        tangent: 1,
                    });
                }
            }
        }
    }
    out
}

/// Regularized diffusivity `(s + delta^2)^((p-2)/2)` with `s = |g|^2`.
#[inline]
pub(crate) fn diffusivity(s: f64, p: f64, delta: f64) -> f64 {
    (s + delta * delta).powf(0.5 * (p - 2.0))
}

/// The flux vector `c (|g|^2 + delta^2)^((p-2)/2) g`.
pub fn flux_vector(g: Point, c: f64, p: f64, delta: f64) -> Point {
    let d = c * diffusivity(g[0] * g[0] + g[1] * g[1], p, delta);
    [d * g[0], d * g[1]]
}

#[derive(Debug, Clone, Copy)]
struct FaceState {
    gn: f64,
    gt: f64,
    c: f64,
}

#[inline]
fn face_state(face: &Face, u: &[f64], coeff: Option<&[f64]>, h: f64) -> FaceState {
    let gn = (u[face.b] - u[face.a]) / h;
    let gt = if face.tangent == 0 {
        0.0
    } else {
        let t = face.tangent;
        (u[face.a + t] - u[face.a - t] + u[face.b + t] - u[face.b - t]) / (4.0 * h)
    };
    let c = coeff.map_or(1.0, |c| 0.5 * (c[face.a] + c[face.b]));
    FaceState { gn, gt, c }
}

/// Discrete divergence of the flux at every node; zero on the boundary.
pub(crate) fn divergence(
    grid: &Grid,
    faces: &[Face],
    u: &[f64],
    coeff: Option<&[f64]>,
    p: f64,
    delta: f64,
) -> Vec<f64> {
    let h = grid.h();
    let mut div = vec![0.0; u.len()];
    for f in faces {
        let st = face_state(f, u, coeff, h);
        let flux = st.c * diffusivity(st.gn * st.gn + st.gt * st.gt, p, delta) * st.gn;
        div[f.a] += flux / h;
        div[f.b] -= flux / h;
    }
    for (s, d) in div.iter_mut().enumerate() {
        if grid.is_boundary(s) {
            *d = 0.0;
        }
    }
    div
}

/// Half-bandwidth of the step matrix in natural node ordering.
pub(crate) fn bandwidth(grid: &Grid) -> usize {
    match grid.dim() {
        1 => 1,
        _ => grid.nx() + 1,
    }
}

/// How the face fluxes are linearized when assembling the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Linearization {
    /// Exact derivative of the flux.
    Newton,
    /// Diffusivity frozen at the current iterate.
    Lagged,
}

/// Backward-Euler residual `u - u_prev - dt div F(u)` on interior nodes and
/// `u - boundary` on boundary nodes, together with its (linearized) Jacobian.
pub(crate) struct System<'a> {
    pub grid: &'a Grid,
    pub faces: &'a [Face],
    pub p: f64,
    pub delta: f64,
    pub dt: f64,
    pub coeff: Option<&'a [f64]>,
}

impl System<'_> {
    pub fn residual(&self, u: &[f64], u_prev: &[f64], boundary: &[f64]) -> Vec<f64> {
        let div = divergence(self.grid, self.faces, u, self.coeff, self.p, self.delta);
        (0..u.len())
            .map(|s| {
                if self.grid.is_boundary(s) {
                    u[s] - boundary[s]
                } else {
                    u[s] - u_prev[s] - self.dt * div[s]
                }
            })
            .collect()
    }

    pub fn assemble(&self, u: &[f64], mode: Linearization, mat: &mut BandMatrix) {
        let grid = self.grid;
        let h = grid.h();
        let (p, delta) = (self.p, self.delta);
        mat.clear();
        for s in 0..u.len() {
            mat.set(s, s, 1.0);
        }
        let scale = self.dt / h;
        let mut cols: [(usize, f64); 6] = [(0, 0.0); 6];
        for f in self.faces {
            let st = face_state(f, u, self.coeff, h);
            let sq = st.gn * st.gn + st.gt * st.gt;
            let phi = diffusivity(sq, p, delta);
            let (d_gn, d_gt) = match mode {
                Linearization::Lagged => (st.c * phi, 0.0),
                Linearization::Newton => {
                    let dphi = 0.5 * (p - 2.0) * (sq + delta * delta).powf(0.5 * (p - 4.0));
                    (
                        st.c * (phi + 2.0 * dphi * st.gn * st.gn),
                        st.c * 2.0 * dphi * st.gn * st.gt,
                    )
                }
            };
            let mut m = 0;
            cols[m] = (f.b, d_gn / h);
            m += 1;
            cols[m] = (f.a, -d_gn / h);
            m += 1;
            if f.tangent != 0 && d_gt != 0.0 {
                let t = f.tangent;
                let w = d_gt / (4.0 * h);
                for (node, sign) in [(f.a + t, 1.0), (f.a - t, -1.0), (f.b + t, 1.0), (f.b - t, -1.0)] {
                    cols[m] = (node, sign * w);
                    m += 1;
                }
            }
            // residual row a carries -dt F / h, row b carries +dt F / h
            let a_interior = !grid.is_boundary(f.a);
            let b_interior = !grid.is_boundary(f.b);
            for &(col, dflux) in &cols[..m] {
                if a_interior {
                    mat.add(f.a, col, -scale * dflux);
                }
                if b_interior {
                    mat.add(f.b, col, scale * dflux);
                }
            }
        }
    }
}
