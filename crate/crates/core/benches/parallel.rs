use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sign_stable::collision::{collision_mixture_mc_with, kernel_matrix, KernelKind};
use sign_stable::sketch::sketch_many;
use sign_stable::verify::random_histogram;
use sign_stable::{Execution, SeededRng, SketchConfig};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench_sketch_many(c: &mut Criterion) {
    let mut rng = SeededRng::new(1, 0);
    let vectors: Vec<_> = (0..64).map(|_| random_histogram(2000, 0.9, &mut rng)).collect();
    let config = SketchConfig::new(8192, 1.0, 7).unwrap();
    let mut group = c.benchmark_group("sketch_many");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sketch_many(black_box(&vectors), &config, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_kernel(c: &mut Criterion) {
    let mut rng = SeededRng::new(2, 0);
    let vectors: Vec<_> = (0..300).map(|_| random_histogram(500, 0.5, &mut rng)).collect();
    let mut group = c.benchmark_group("kernel_matrix");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| kernel_matrix(black_box(&vectors), KernelKind::AcosChi2, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_mixture(c: &mut Criterion) {
    let mut rng = SeededRng::new(3, 0);
    let u = random_histogram(50, 0.2, &mut rng);
    let v = random_histogram(50, 0.2, &mut rng);
    let mc_rng = SeededRng::new(3, 1);
    let mut group = c.benchmark_group("collision_mixture_mc");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| collision_mixture_mc_with(black_box(&u), &v, 1.0, 50_000, &mc_rng, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sketch_many, bench_kernel, bench_mixture);
criterion_main!(benches);
