use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;

/// Forward time average `u_h(., t) = (1/h) int_t^{t+h} u(., tau) d tau` of the
/// piecewise-linear-in-time interpolant; zero where `t + h` leaves the grid.
pub fn steklov_average(field: &SpaceTimeField, h: f64) -> Result<SpaceTimeField> {
    let grid = *field.grid();
    let span = grid.t_end() - grid.t_start();
    if !(h > 0.0 && h < span) {
        return Err(Error::InvalidParameter(format!(
            "window h must lie in (0, {span}), got {h}"
        )));
    }
    let dt = grid.dt();
    let steps = h / dt;
    let mut whole = steps.floor() as usize;
    let mut frac = steps - whole as f64;
    if frac > 1.0 - 1e-9 {
        whole += 1;
        frac = 0.0;
    } else if frac < 1e-9 {
        frac = 0.0;
    }
    let ns = grid.n_space();
    let mut out = vec![0.0; grid.n_levels() * ns];
    for n in 0..grid.n_levels() {
        let last = n + whole + usize::from(frac > 0.0);
        if last > grid.nt() {
            continue;
        }
        for s in 0..ns {
            let mut acc = 0.0;
            for j in 0..whole {
                acc += 0.5 * dt * (field.at(n + j, s) + field.at(n + j + 1, s));
            }
            if frac > 0.0 {
                let a = field.at(n + whole, s);
                let b = field.at(n + whole + 1, s);
                acc += frac * dt * (a + 0.5 * frac * (b - a));
            }
            out[n * ns + s] = acc / h;
        }
    }
    SpaceTimeField::new(grid, out)
}
