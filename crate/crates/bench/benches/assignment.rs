use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use vimbench_core::assignment::{hungarian, CostMatrix};

fn bench_hungarian(c: &mut Criterion) {
    let mut group = c.benchmark_group("hungarian");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for &n in &[4usize, 16, 64, 128] {
        let m = CostMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..1.0)).unwrap();
        group.bench_with_input(BenchmarkId::new("random", n), &m, |b, m| b.iter(|| hungarian(black_box(m))));
        let ties = CostMatrix::from_fn(n, n, |_, _| rng.random_range(0..3) as f64).unwrap();
        group.bench_with_input(BenchmarkId::new("ties", n), &ties, |b, m| b.iter(|| hungarian(black_box(m))));
    }
    group.finish();
}

criterion_group!(benches, bench_hungarian);
criterion_main!(benches);
