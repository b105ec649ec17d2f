use pstable_core::iteration2::second_iteration;
use pstable_core::solver::solve;
use pstable_core::{verify_degiorgi, Cylinder, Grid, SolverConfig, StructureParams};

fn bump(grid: &Grid) -> Vec<f64> {
    (0..grid.n_space())
        .map(|s| {
            let x = grid.coords(s);
            2.0 * (1.0 - (x[0] * x[0] + x[1] * x[1]) / 0.49).max(0.0).powi(2)
        })
        .collect()
}

#[test]
fn solved_bump_passes_both_iterations() {
    for (dim, nx, nt, dt) in [(1, 81, 80, 0.025), (2, 31, 30, 0.0667)] {
        for p in [1.9, 2.0, 3.0] {
            let grid = Grid::new(dim, 1.0, nx, nt, dt).unwrap();
            let params = StructureParams::first_bound(dim, p).unwrap();
            let field = solve(&grid, &bump(&grid), &SolverConfig::new(params), |_, _| 0.0).unwrap();
            let cyl = Cylinder::new(0.9, 0.9).unwrap();
            let report = verify_degiorgi(&field, &params, 0.5, cyl, None).unwrap();
            assert!(
                report.satisfied,
                "dim {dim}, p {p}: {} > {}",
                report.sup_inner, report.k
            );
            assert!(report.trace.decayed_below(1e-8).is_some());
            let second = second_iteration(&field, p, 0.5, cyl, 1.0).unwrap();
            assert!(second.dominated && second.steps_hold, "dim {dim}, p {p}");
        }
    }
}
