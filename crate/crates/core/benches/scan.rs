//! Sequential vs. rayon throughput for the two data-parallel hot paths:
//! random flag scans and curvature tensor assembly.

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DVector;

use randers_core::flag::scan_flags;
use randers_core::{presets, Geometry, MetricStructure, Parallelism, Tolerances};

fn u2_geometry() -> Geometry {
    let alg = presets::u2();
    let metric = MetricStructure::identity(4);
    let mut drift = DVector::zeros(4);
    drift[3] = 0.5;
    Geometry::new(alg, metric, None, drift, Tolerances::default()).expect("valid fixture")
}

fn sum_geometry(copies: usize) -> Geometry {
    let alg = presets::su2_sum(copies);
    let dim = alg.dim();
    let metric = MetricStructure::identity(dim);
    Geometry::new(alg, metric, None, DVector::zeros(dim), Tolerances::default())
        .expect("valid fixture")
}

fn bench_scan(c: &mut Criterion) {
    let geom = u2_geometry();
    let oracle = geom.oracle().expect("oracle");
    let mut group = c.benchmark_group("flag_scan_u2_n16384");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| scan_flags(&geom, &oracle, 16384, 7, Parallelism::Sequential).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| scan_flags(&geom, &oracle, 16384, 7, Parallelism::Auto).unwrap())
    });
    group.finish();
}

fn bench_tensor(c: &mut Criterion) {
    let geom = sum_geometry(4); // dim 12: 20736 lowered components
    let mut group = c.benchmark_group("curvature_tensor_dim12");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| geom.oracle_with(Parallelism::Sequential).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| geom.oracle_with(Parallelism::Auto).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_scan, bench_tensor);
criterion_main!(benches);
