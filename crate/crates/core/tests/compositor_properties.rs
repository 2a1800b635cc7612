use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vimbench_core::compositor::{
    composite_frame, composition_residual, generate_clip_streaming, BackgroundClip, ClipParams, ForegroundClip,
    ForegroundFrame, ForegroundSource,
};
use vimbench_core::{AlphaMatte, RgbImage};

fn random_layers(rng: &mut ChaCha8Rng, n: usize, h: usize, w: usize) -> Vec<(RgbImage, AlphaMatte)> {
    (0..n)
        .map(|_| {
            let rgb = RgbImage::from_fn(h, w, |_, _| [rng.random(), rng.random(), rng.random()]);
            // Mix of exact 0, exact 1 and fractional alpha.
            let alpha = AlphaMatte::from_fn(h, w, |_, _| match rng.random_range(0..4) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random(),
            });
            (rgb, alpha)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn attenuated_alphas_partition_the_pixel(seed in any::<u64>(), n in 1usize..5, h in 1usize..9, w in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = random_layers(&mut rng, n, h, w);
        let bg = RgbImage::from_fn(h, w, |_, _| [rng.random(), rng.random(), rng.random()]);
        let refs: Vec<_> = layers.iter().map(|(c, a)| (c, a)).collect();
        let out = composite_frame(&bg, &refs).unwrap();
        prop_assert_eq!(out.alphas.len(), n);
        for p in 0..h * w {
            let mut total = 0.0f64;
            for (k, att) in out.alphas.iter().enumerate() {
                let v = att.values()[p] as f64;
                prop_assert!(v >= 0.0);
                prop_assert!(v <= layers[k].1.values()[p] as f64 + 1e-7);
                total += v;
            }
            prop_assert!(total <= 1.0, "pixel {} sums to {}", p, total);
        }
        let attenuated: Vec<_> = layers.iter().map(|(c, _)| c).zip(&out.alphas).collect();
        prop_assert_eq!(composition_residual(&out.rgb, &attenuated, &bg).unwrap(), 0.0);
    }

    #[test]
    fn an_opaque_front_layer_hides_everything_behind(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = random_layers(&mut rng, n, 4, 5);
        layers.push((RgbImage::filled(4, 5, [0.25, 0.5, 0.75]), AlphaMatte::filled(4, 5, 1.0)));
        let bg = RgbImage::filled(4, 5, [1.0, 0.0, 0.0]);
        let refs: Vec<_> = layers.iter().map(|(c, a)| (c, a)).collect();
        let out = composite_frame(&bg, &refs).unwrap();
        for att in &out.alphas[..n] {
            prop_assert!(att.values().iter().all(|&v| v == 0.0));
        }
        prop_assert_eq!(out.rgb, RgbImage::filled(4, 5, [0.25, 0.5, 0.75]));
    }
}

fn person(id: &str, frames: usize, h: usize, w: usize) -> ForegroundClip {
    let frames = (0..frames)
        .map(|t| {
            let alpha = AlphaMatte::from_fn(h, w, |y, x| {
                let (dy, dx) = (y as f64 - h as f64 / 2.0, x as f64 - (w as f64 / 2.0 + (t % 5) as f64));
                (1.0 - (dy * dy + dx * dx).sqrt() / (w as f64 / 2.0)).clamp(0.0, 1.0) as f32
            });
            ForegroundFrame::new(RgbImage::filled(h, w, [0.8, 0.6, 0.4]), alpha).unwrap()
        })
        .collect();
    ForegroundClip { instance_id: id.into(), frames }
}

#[test]
fn full_hd_fifty_frame_clip_with_three_foregrounds() {
    let bg = BackgroundClip { frames: vec![RgbImage::filled(27, 48, [0.1, 0.2, 0.3]); 60] };
    let fgs: Vec<ForegroundClip> = (0..3).map(|k| person(&format!("fg{k}"), 55, 64, 36)).collect();
    let sources: Vec<&dyn ForegroundSource> = fgs.iter().map(|f| f as &dyn ForegroundSource).collect();
    let params = ClipParams { instance_range: (3, 3), ..ClipParams::new(50, 1080, 1920, 17) };

    let mut frames = 0;
    let prov = generate_clip_streaming(&bg, &sources, &params, |rec| {
        assert_eq!(rec.index, frames);
        assert_eq!(rec.composite.rgb.dims(), (1080, 1920));
        assert_eq!(rec.composite.alphas.len(), 3);
        assert!(rec.composite.alphas.iter().all(|a| a.dims() == (1080, 1920)));
        assert!(rec.composite.alphas.iter().any(|a| a.mass() > 0.0));
        frames += 1;
        Ok(())
    })
    .unwrap();
    assert_eq!(frames, 50);
    assert_eq!(prov.instance_ids().len(), 3);
    assert_eq!((prov.frame_count, prov.height, prov.width), (50, 1080, 1920));
}
