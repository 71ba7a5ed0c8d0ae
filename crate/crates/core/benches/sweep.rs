//! Sequential versus rayon-parallel evaluation of independent parameter
//! points. Without the `parallel` feature only the sequential path is timed.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gfbbm::solitary::{solve_petviashvili, PetviashviliSettings};
use gfbbm::stability::classify;
use gfbbm::sweep::{lattice, map_points_sequential};
use gfbbm::{ModelParams, SpectralGrid};
use std::hint::black_box;

fn classify_points() -> Vec<(f64, f64)> {
    let alphas = lattice(0.01, 2.0, 0.01);
    let speeds = lattice(0.01, 2.0, 0.01);
    alphas
        .iter()
        .flat_map(|&a| speeds.iter().map(move |&c| (a, c)))
        .collect()
}

fn classify_one(&(alpha, c): &(f64, f64)) -> u8 {
    classify(&ModelParams::new(alpha, 1, c).unwrap()).verdict as u8
}

fn solve_points() -> Vec<(f64, f64)> {
    [1.25, 1.5, 1.75, 2.0]
        .iter()
        .flat_map(|&a| [0.3, 0.5, 1.2, 1.5].map(|c| (a, c)))
        .collect()
}

fn solve_one(&(alpha, c): &(f64, f64)) -> f64 {
    let params = ModelParams::new(alpha, 1, c).unwrap();
    let grid = SpectralGrid::new(64.0, 1 << 11).unwrap();
    solve_petviashvili(&params, &grid, &PetviashviliSettings::default())
        .unwrap()
        .residual
}

fn bench_sweeps(cr: &mut Criterion) {
    let lattice_points = classify_points();
    let mut g = cr.benchmark_group("classify_lattice_p1_0.01");
    g.bench_function(BenchmarkId::from_parameter("sequential"), |b| {
        b.iter(|| black_box(map_points_sequential(&lattice_points, classify_one)))
    });
    #[cfg(feature = "parallel")]
    g.bench_function(BenchmarkId::from_parameter("parallel"), |b| {
        b.iter(|| {
            black_box(gfbbm::sweep::map_points_parallel(
                &lattice_points,
                classify_one,
            ))
        })
    });
    g.finish();

    let waves = solve_points();
    let mut g = cr.benchmark_group("petviashvili_batch_16x2048");
    g.sample_size(10);
    g.bench_function(BenchmarkId::from_parameter("sequential"), |b| {
        b.iter(|| black_box(map_points_sequential(&waves, solve_one)))
    });
    #[cfg(feature = "parallel")]
    g.bench_function(BenchmarkId::from_parameter("parallel"), |b| {
        b.iter(|| black_box(gfbbm::sweep::map_points_parallel(&waves, solve_one)))
    });
    g.finish();
}

criterion_group!(benches, bench_sweeps);
criterion_main!(benches);
