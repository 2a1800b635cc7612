#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vimbench_core::io::{save_instance_set, save_matte, save_rgb, BitDepth, ClipManifest, MANIFEST_FILE};
use vimbench_core::{AlphaMatte, InstanceSet, MatteSequence, RgbImage};

pub fn vimbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vimbench"))
        .args(args)
        .env_remove("VIMBENCH_THREADS")
        .output()
        .expect("binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Soft disc: 1 inside `r - 1`, linear ramp to 0 at `r`.
pub fn soft_disc(h: usize, w: usize, cy: f64, cx: f64, r: f64) -> AlphaMatte {
    AlphaMatte::from_fn(h, w, |y, x| {
        let d = ((y as f64 + 0.5 - cy).powi(2) + (x as f64 + 0.5 - cx).powi(2)).sqrt();
        (r - d).clamp(0.0, 1.0) as f32
    })
}

/// Non-overlapping moving discs, one per instance, laid out in columns.
pub fn disc_scene(frames: usize, instances: usize, h: usize, w: usize, rng: &mut ChaCha8Rng) -> InstanceSet {
    let cell = w as f64 / instances as f64;
    let r = (cell / 2.0 - 2.0).min(h as f64 / 2.0 - 2.0).max(2.0);
    InstanceSet::from_sequences((0..instances).map(|k| {
        let cx0 = cell * (k as f64 + 0.5);
        let cy0 = h as f64 / 2.0;
        let wobble = (cell / 2.0 - r - 1.0).max(0.0);
        let (vx, vy): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let frames = (0..frames)
            .map(|t| {
                let s = (t as f64 * 0.7).sin();
                soft_disc(h, w, cy0 + vy * wobble * s, cx0 + vx * wobble * s, r)
            })
            .collect();
        MatteSequence::new(format!("obj{k}"), frames).unwrap()
    }))
    .unwrap()
}

/// Writes `set` as a ground-truth clip with a manifest.
pub fn write_gt_clip(root: &Path, clip_id: &str, set: &InstanceSet) -> PathBuf {
    let dir = root.join(clip_id);
    save_instance_set(set, &dir, BitDepth::Sixteen).unwrap();
    let (height, width) = set.dims();
    ClipManifest {
        clip_id: clip_id.into(),
        frame_count: set.frame_count(),
        width,
        height,
        gt_instances: set.ids().map(str::to_owned).collect(),
    }
    .write(&dir.join(MANIFEST_FILE))
    .unwrap();
    dir
}

/// Writes a prediction clip (instance directories only).
pub fn write_pred_clip(root: &Path, clip_id: &str, set: &InstanceSet) {
    save_instance_set(set, &root.join(clip_id), BitDepth::Sixteen).unwrap();
}

/// A foreground asset directory with `fgr/` and `pha/` frames.
pub fn write_foreground(dir: &Path, frames: usize, h: usize, w: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colour: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    std::fs::create_dir_all(dir.join("fgr")).unwrap();
    std::fs::create_dir_all(dir.join("pha")).unwrap();
    for t in 0..frames {
        let name = format!("{t:05}.png");
        let rgb = RgbImage::from_fn(h, w, |y, x| {
            [colour[0], (colour[1] + 0.3 * y as f64 / h as f64) % 1.0, (colour[2] + 0.01 * (x + t) as f64) % 1.0]
        });
        let r = h.min(w) as f64 * 0.4;
        let alpha = soft_disc(h, w, h as f64 / 2.0 + (t % 3) as f64, w as f64 / 2.0, r);
        save_rgb(&rgb, &dir.join("fgr").join(&name)).unwrap();
        save_matte(&alpha, &dir.join("pha").join(&name), BitDepth::Eight).unwrap();
    }
}

pub fn write_background(dir: &Path, frames: usize, h: usize, w: usize) {
    std::fs::create_dir_all(dir).unwrap();
    for t in 0..frames {
        let img = RgbImage::from_fn(h, w, |y, x| {
            [y as f64 / h as f64, x as f64 / w as f64, (t as f64 / frames as f64 + 0.2) % 1.0]
        });
        save_rgb(&img, &dir.join(format!("{t:05}.png"))).unwrap();
    }
}
