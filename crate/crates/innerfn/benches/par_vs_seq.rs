//! Parallel vs. sequential comparison of the data-parallel kernels.
//!
//! With the default `parallel` feature the inner loops run on the rayon
//! pool; a single-thread pool forces the same code down the sequential
//! path.  Results are bit-identical either way (fixed-tree reductions), so
//! these benches measure scheduling overhead and speedup only.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use innerfn::exec;
use innerfn::inner::InnerFunction;
use innerfn::norms::{circle_mean, DerivOf};
use innerfn::zeros::{disc_average_profile, FrostmanZeroSource};

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

fn num_cpus() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(4)
}

fn bench_pairwise_sum(c: &mut Criterion) {
    let mut group = c.benchmark_group("pairwise_map_sum");
    let n = 1 << 20;
    let f = |i: usize| ((i as f64) * 1.000_000_7).sin();
    group.bench_function(BenchmarkId::new("seq", n), |b| {
        b.iter(|| exec::map_sum_seq(n, &f))
    });
    group.bench_function(BenchmarkId::new("par", n), |b| {
        b.iter(|| exec::map_sum(n, &f))
    });
    // sanity: identical bits
    assert_eq!(
        exec::map_sum(n, &f).to_bits(),
        exec::map_sum_seq(n, &f).to_bits()
    );
    group.finish();
}

fn bench_circle_mean(c: &mut Criterion) {
    let mut group = c.benchmark_group("circle_mean_atomic_derivative");
    group.sample_size(10);
    let s = InnerFunction::atomic();
    let r = 1.0 - 0.5f64.powi(12);
    let one = pool(1);
    let many = pool(num_cpus());
    group.bench_function("seq(1 thread)", |b| {
        b.iter(|| one.install(|| circle_mean(&DerivOf(&s), r, 1.0, 1e-7).unwrap()))
    });
    group.bench_function("par(pool)", |b| {
        b.iter(|| many.install(|| circle_mean(&DerivOf(&s), r, 1.0, 1e-7).unwrap()))
    });
    group.finish();
}

fn bench_disc_average(c: &mut Criterion) {
    let mut group = c.benchmark_group("disc_average_profile");
    group.sample_size(10);
    let src = FrostmanZeroSource::AtomicExact { mass: 2.0 };
    let one = pool(1);
    let many = pool(num_cpus());
    group.bench_function("seq(1 thread)", |b| {
        b.iter(|| one.install(|| disc_average_profile(&src, 0.5, 1.0, 14, 24, 48).unwrap()))
    });
    group.bench_function("par(pool)", |b| {
        b.iter(|| many.install(|| disc_average_profile(&src, 0.5, 1.0, 14, 24, 48).unwrap()))
    });
    // scheduling must not change the values
    let a = one.install(|| disc_average_profile(&src, 0.5, 1.0, 10, 16, 32).unwrap());
    let b = many.install(|| disc_average_profile(&src, 0.5, 1.0, 10, 16, 32).unwrap());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.value.to_bits(), y.value.to_bits());
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_pairwise_sum,
    bench_circle_mean,
    bench_disc_average
);
criterion_main!(benches);
