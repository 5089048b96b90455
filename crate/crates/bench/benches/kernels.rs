use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;

use bcv_core::bcv::{observed_matrix, BcvConfig, Observation};
use bcv_core::graph::{generate_sbm, Membership, SbmSpec};
use bcv_core::numerics::{kmeans, truncated_svd, KMeansOptions, SvdOptions};
use bcv_core::{select, BipartiteGraph};

fn planted(n: usize, scale: f64) -> BipartiteGraph {
    let b0 = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.85 } else { 0.2 });
    let spec = SbmSpec::scaled(
        &b0,
        scale,
        Membership::Multinomial {
            pi1: vec![1.0 / 3.0; 3],
            pi2: vec![1.0 / 3.0; 3],
        },
    )
    .unwrap();
    generate_sbm(&spec, n, n, 7).unwrap().0
}

fn svd(c: &mut Criterion) {
    let small = planted(300, 0.1);
    let y = observed_matrix(&small, Observation::Full).unwrap();
    c.bench_function("truncated_svd exact 300x300 k=3", |b| {
        b.iter(|| truncated_svd(black_box(&y), 3, &SvdOptions::default()).unwrap())
    });
    let large = planted(2000, 0.02);
    let y = observed_matrix(&large, Observation::Full).unwrap();
    c.bench_function("truncated_svd randomized 2000x2000 k=3", |b| {
        b.iter(|| truncated_svd(black_box(&y), 3, &SvdOptions::default()).unwrap())
    });
}

fn clustering(c: &mut Criterion) {
    let pts = DMatrix::from_fn(1000, 3, |i, j| ((i % 5) as f64) + 0.01 * ((i * 7 + j * 13) % 17) as f64);
    c.bench_function("kmeans 1000x3 k=5", |b| {
        b.iter(|| kmeans(black_box(&pts), 5, &KMeansOptions::default()).unwrap())
    });
}

fn selection(c: &mut Criterion) {
    let g = planted(300, 0.1);
    let mut group = c.benchmark_group("select");
    group.sample_size(10);
    group.bench_function("300x300 planted (3,3)", |b| {
        b.iter(|| select(black_box(&g), &BcvConfig::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, svd, clustering, selection);
criterion_main!(benches);
