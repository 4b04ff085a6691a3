use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use mehist::data_aligned::{best_merge, best_merge_exhaustive};
use mehist::{
    DataAlignedEstimator, ExactQuantileStore, InterpolatedEstimator, P2Estimator, Quantile,
    QuantileEstimator, ReservoirEstimator, UniformHistEstimator,
};
use mehist_bench::{bin_counts, mixture};

const STREAM: usize = 100_000;

fn observe_all(est: &mut dyn QuantileEstimator, data: &[f64]) {
    for &d in data {
        est.observe(d).unwrap();
    }
}

fn bench_observe(c: &mut Criterion) {
    let data = mixture(STREAM);
    let q = Quantile::new(0.95).unwrap();
    let mut group = c.benchmark_group("observe");
    group.throughput(Throughput::Elements(STREAM as u64));
    group.sample_size(10);
    for bins in [50usize, 100, 500] {
        group.bench_with_input(BenchmarkId::new("data-aligned", bins), &bins, |b, &n| {
            b.iter(|| {
                let mut e = DataAlignedEstimator::new(n).unwrap();
                observe_all(&mut e, &data);
                black_box(e.estimate(q).unwrap())
            })
        });
        group.bench_with_input(BenchmarkId::new("interpolated", bins), &bins, |b, &n| {
            b.iter(|| {
                let mut e = InterpolatedEstimator::new(n).unwrap();
                observe_all(&mut e, &data);
                black_box(e.estimate(q).unwrap())
            })
        });
        group.bench_with_input(BenchmarkId::new("uniform", bins), &bins, |b, &n| {
            b.iter(|| {
                let mut e = UniformHistEstimator::new(n).unwrap();
                observe_all(&mut e, &data);
                black_box(e.estimate(q).unwrap())
            })
        });
        group.bench_with_input(BenchmarkId::new("reservoir", bins), &bins, |b, &n| {
            b.iter(|| {
                let mut e = ReservoirEstimator::new(n, 1).unwrap();
                observe_all(&mut e, &data);
                black_box(e.estimate(q).unwrap())
            })
        });
    }
    group.bench_function("p2", |b| {
        b.iter(|| {
            let mut e = P2Estimator::new(q);
            observe_all(&mut e, &data);
            black_box(e.estimate(q).unwrap())
        })
    });
    group.bench_function("oracle", |b| {
        b.iter(|| {
            let mut o = ExactQuantileStore::new();
            for &d in &data {
                o.insert(d).unwrap();
            }
            black_box(o.quantile(q).unwrap())
        })
    });
    group.finish();
}

fn bench_merge_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("best_merge");
    for bins in [50usize, 500] {
        let counts = bin_counts(bins + 1);
        group.bench_with_input(BenchmarkId::new("incremental", bins), &counts, |b, c| {
            b.iter(|| best_merge(black_box(c)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("exhaustive", bins), &counts, |b, c| {
            b.iter(|| best_merge_exhaustive(black_box(c)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_observe, bench_merge_search);
criterion_main!(benches);
