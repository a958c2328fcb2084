use std::hint::black_box;

use corrlab_bench::{bump, dilated_bump};
use corrlab_core::scattering::default_grid;
use corrlab_core::{evolve_free, evolve_radial, solve_zero_energy, window_functional, CutoffChi, RadialGrid};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn scattering(c: &mut Criterion) {
    let spec = bump().unwrap();
    let mut g = c.benchmark_group("solve_zero_energy");
    for dr in [1e-3, 1e-4] {
        let grid = RadialGrid::aligned(dr, 4.0, 1.0).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(dr), &grid, |b, grid| {
            b.iter(|| solve_zero_energy(black_box(&spec), grid).unwrap())
        });
    }
    g.finish();
}

fn crank_nicolson(c: &mut Criterion) {
    let spec = bump().unwrap();
    let mut g = c.benchmark_group("crank_nicolson_100_steps");
    for nodes in [4_001usize, 40_001] {
        let field = dilated_bump(10.0, nodes, 2.0).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(nodes), &field, |b, f| {
            b.iter(|| evolve_radial(black_box(f), &spec, 1.0, 0.01).unwrap())
        });
    }
    g.finish();
}

fn free_evolution(c: &mut Criterion) {
    let mut g = c.benchmark_group("evolve_free");
    for nodes in [4_096usize, 65_536] {
        let field = dilated_bump(10.0, nodes, 1.0).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(nodes), &field, |b, f| {
            b.iter(|| evolve_free(black_box(f), 1.0, 5.0).unwrap())
        });
    }
    g.finish();
}

fn window(c: &mut Criterion) {
    let spec = bump().unwrap();
    let sol = solve_zero_energy(&spec, &default_grid(&spec).unwrap()).unwrap();
    let chi = CutoffChi::standard().unwrap();
    let field = dilated_bump(100.0, 80_001, 2.0).unwrap();
    c.bench_function("window_functional", |b| {
        b.iter(|| window_functional(black_box(&field), &sol, 4.0, &chi).unwrap())
    });
}

criterion_group!(benches, scattering, crank_nicolson, free_evolution, window);
criterion_main!(benches);
