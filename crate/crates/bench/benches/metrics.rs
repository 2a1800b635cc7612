use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use vimbench_core::metrics::{vimq, MetricConfig};
use vimbench_core::{AlphaMatte, InstanceSet, MatteSequence};

fn scene(frames: usize, n: usize, h: usize, w: usize, jitter: f64, seed: u64) -> InstanceSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    InstanceSet::from_sequences((0..n).map(|k| {
        let cx = (k as f64 + 0.5) * w as f64 / n as f64;
        let r = w as f64 / n as f64 * 0.4;
        let seq = (0..frames)
            .map(|t| {
                let dx = rng.random_range(-jitter..=jitter);
                AlphaMatte::from_fn(h, w, |y, x| {
                    let d = ((y as f64 - h as f64 / 2.0).powi(2) + (x as f64 - cx - dx - t as f64).powi(2)).sqrt();
                    (r - d).clamp(0.0, 1.0) as f32
                })
            })
            .collect();
        MatteSequence::new(format!("i{k}"), seq).unwrap()
    }))
    .unwrap()
}

fn bench_vimq(c: &mut Criterion) {
    let cfg = MetricConfig::default();
    let mut group = c.benchmark_group("vimq");
    group.sample_size(10);
    for &(h, w) in &[(128usize, 256usize), (540, 960)] {
        let gt = scene(20, 4, h, w, 0.0, 1);
        let pred = scene(20, 4, h, w, 2.0, 2);
        group.bench_function(format!("{w}x{h}x20x4"), |b| b.iter(|| vimq(black_box(&pred), black_box(&gt), &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_vimq);
criterion_main!(benches);
