use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use movrptw::moea::operators::random_chromosome;
use movrptw::moea::sorting::fast_nondominated_sort;
use movrptw::solution::{decode, evaluate, DelayRef};
use movrptw::ObjectiveVector;
use movrptw_bench::benchmark_instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bench_decode_evaluate(c: &mut Criterion) {
    let mut group = c.benchmark_group("decode_evaluate");
    for n in [50usize, 150, 250] {
        let inst = benchmark_instance(n, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let genes = random_chromosome(n, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let sol = decode(black_box(&genes), &inst);
                evaluate(&sol, &inst, DelayRef::WindowStart).unwrap()
            });
        });
    }
    group.finish();
}

fn bench_nondominated_sort(c: &mut Criterion) {
    let mut group = c.benchmark_group("fast_nondominated_sort");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for size in [200usize, 1000] {
        let points: Vec<Vec<f64>> = (0..size)
            .map(|_| (0..5).map(|_| rng.random_range(0.0..100.0)).collect())
            .collect();
        group.bench_with_input(BenchmarkId::from_parameter(size), &points, |b, pts| {
            b.iter(|| fast_nondominated_sort(black_box(pts)));
        });
    }
    group.finish();
}

fn bench_pareto_filter(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let points: Vec<ObjectiveVector> = (0..500)
        .map(|_| ObjectiveVector(std::array::from_fn(|_| rng.random_range(0.0..50.0))))
        .collect();
    c.bench_function("pareto_filter_500", |b| {
        b.iter(|| movrptw::pareto_filter_indices(black_box(&points)));
    });
}

criterion_group!(
    benches,
    bench_decode_evaluate,
    bench_nondominated_sort,
    bench_pareto_filter
);
criterion_main!(benches);
