use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use palpate_core::frechet::{discrete_frechet, PolyCurve};
use palpate_core::skinfit::{forward_compression, LayerStack};
use palpate_core::stats::kmeans;
use palpate_core::stiffness::{recursive_update, PosteriorUpdate};
use palpate_core::synth::{spring_trace, triangle_profile};
use palpate_core::trace::moving_average;

fn bench_frechet(c: &mut Criterion) {
    let mut group = c.benchmark_group("discrete_frechet");
    for n in [50usize, 200, 800] {
        let p: Vec<f64> = (0..n).map(|i| (i as f64 * 0.05).sin()).collect();
        let q: Vec<f64> = (0..n).map(|i| (i as f64 * 0.05 + 0.3).sin()).collect();
        let p = PolyCurve::one_d(&p, "p").unwrap();
        let q = PolyCurve::one_d(&q, "q").unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| discrete_frechet(black_box(&p), black_box(&q)).unwrap())
        });
    }
    group.finish();
}

fn bench_smoothing(c: &mut Criterion) {
    let profile = triangle_profile(1.0, 2.0, 2000.0).unwrap();
    let trial = spring_trace(1.5, &profile, 0.02, 3).unwrap();
    c.bench_function("moving_average_8k_window100", |b| {
        b.iter(|| moving_average(black_box(&trial.displacement), 100).unwrap())
    });
}

fn bench_recursion(c: &mut Criterion) {
    let series: Vec<(f64, f64)> = (0..5000)
        .map(|i| (i as f64 * 1e-3, 2.0 + (i % 13) as f64 * 0.01))
        .collect();
    c.bench_function("recursive_update_5k", |b| {
        b.iter(|| {
            recursive_update(black_box(&series), 0.5, 1.0, PosteriorUpdate::Variance).unwrap()
        })
    });
}

fn bench_compression(c: &mut Criterion) {
    let stack = LayerStack::with_defaults(2.5).unwrap();
    let delta = 0.5 * stack.total_thickness_mm();
    c.bench_function("forward_compression_mid_stack", |b| {
        b.iter(|| forward_compression(black_box(&stack), black_box(delta)).unwrap())
    });
}

fn bench_kmeans(c: &mut Criterion) {
    let points: Vec<Vec<f64>> = (0..2000)
        .map(|i| {
            let cluster = (i % 4) as f64;
            vec![
                cluster * 5.0 + (i as f64 * 0.7).sin(),
                cluster * 3.0 + (i as f64 * 1.3).cos(),
            ]
        })
        .collect();
    c.bench_function("kmeans_2k_points_k4", |b| {
        b.iter(|| kmeans(black_box(&points), 4, 9, 100).unwrap())
    });
}

criterion_group!(
    benches,
    bench_frechet,
    bench_smoothing,
    bench_recursion,
    bench_compression,
    bench_kmeans
);
criterion_main!(benches);
