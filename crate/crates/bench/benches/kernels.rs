use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use prime_points::{count_prime_solutions, det, perm, pf, primes_up_to, CountOptions, LinearEquation, SignMode};
use prime_points_bench::{random_antisymmetric, random_square};

fn bench_det(c: &mut Criterion) {
    let mut g = c.benchmark_group("det");
    for n in [4usize, 8, 16, 32] {
        let x = random_square(n, 50, n as u64);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| det(black_box(x)).unwrap()));
    }
    g.finish();
}

fn bench_perm(c: &mut Criterion) {
    let mut g = c.benchmark_group("perm");
    for n in [4usize, 8, 12, 14] {
        let x = random_square(n, 50, n as u64);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| perm(black_box(x)).unwrap()));
    }
    g.finish();
}

fn bench_pf(c: &mut Criterion) {
    let mut g = c.benchmark_group("pf");
    for half in [2usize, 4, 6, 7] {
        let x = random_antisymmetric(half, 50, half as u64);
        g.bench_with_input(BenchmarkId::from_parameter(2 * half), &x, |b, x| b.iter(|| pf(black_box(x)).unwrap()));
    }
    g.finish();
}

fn bench_sieve(c: &mut Criterion) {
    let mut g = c.benchmark_group("sieve");
    for bound in [10_000u64, 100_000, 1_000_000] {
        g.bench_with_input(BenchmarkId::from_parameter(bound), &bound, |b, &t| {
            b.iter(|| primes_up_to(black_box(t)).unwrap())
        });
    }
    g.finish();
}

fn bench_vaughan(c: &mut Criterion) {
    let mut g = c.benchmark_group("vaughan_count");
    g.sample_size(10);
    let eq = LinearEquation::new(vec![1, 1, 1], 11).unwrap();
    let opts = CountOptions::with_mode(SignMode::Signed);
    for t in [250u64, 500, 1000] {
        g.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            b.iter(|| count_prime_solutions(black_box(&eq), t, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_det, bench_perm, bench_pf, bench_sieve, bench_vaughan);
criterion_main!(benches);
