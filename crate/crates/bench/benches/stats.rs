use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use opdiv_bench::normal_sample;
use opdiv_core::influence::granger_test;
use opdiv_core::stats::{bh_correct, ks_test};
use std::hint::black_box;

fn ks(c: &mut Criterion) {
    let mut group = c.benchmark_group("ks_test");
    for n in [100, 2_000, 10_000] {
        let x = normal_sample(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| ks_test(black_box(x), 0.0, 1.0).unwrap()));
    }
    group.finish();
}

fn bh(c: &mut Criterion) {
    let p: Vec<f64> = normal_sample(900, 2).iter().map(|z| (z.abs() / 4.0).min(1.0)).collect();
    c.bench_function("bh_correct/900", |b| b.iter(|| bh_correct(black_box(&p), 0.05).unwrap()));
}

fn granger(c: &mut Criterion) {
    let x = normal_sample(1_000, 3);
    let y = normal_sample(1_000, 4);
    let mut group = c.benchmark_group("granger_test");
    for lag in [1, 2, 5] {
        group.bench_with_input(BenchmarkId::from_parameter(lag), &lag, |b, &l| b.iter(|| granger_test(black_box(&x), black_box(&y), l).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, ks, bh, granger);
criterion_main!(benches);
