use criterion::{criterion_group, criterion_main, Criterion};
use pstable_bench::{bump_slice, config};
use pstable_core::iteration2::second_iteration;
use pstable_core::solver::solve;
use pstable_core::{verify_degiorgi, Cylinder, Grid};

fn pipeline(c: &mut Criterion) {
    let grid = Grid::new(2, 1.0, 41, 40, 0.05).unwrap();
    let cfg = config(2, 2.5);
    let field = solve(&grid, &bump_slice(&grid, 2.0, 0.7), &cfg, |_, _| 0.0).unwrap();
    let cyl = Cylinder::new(0.9, 0.9).unwrap();

    let mut group = c.benchmark_group("iterations_2d");
    group.sample_size(20);
    group.bench_function("verify_degiorgi_calibrated", |b| {
        b.iter(|| verify_degiorgi(&field, &cfg.params, 0.5, cyl, None).unwrap())
    });
    group.bench_function("verify_degiorgi_fixed_c0", |b| {
        b.iter(|| verify_degiorgi(&field, &cfg.params, 0.5, cyl, Some(1.0)).unwrap())
    });
    group.bench_function("second_iteration", |b| {
        b.iter(|| second_iteration(&field, 2.5, 0.5, cyl, 1.0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
