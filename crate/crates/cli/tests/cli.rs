mod common;

use std::fs;
use std::path::Path;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use vimbench_core::io::{load_mask_sequence, save_mask_sequence, save_rgb};
use vimbench_core::metrics::merge_instances;
use vimbench_core::{BinaryMask, MaskSequence, RgbImage};

fn gt_dataset(root: &Path, clips: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for c in 0..clips {
        let set = disc_scene(4, 2 + c % 2, 24, 48, &mut rng);
        write_gt_clip(root, &format!("clip{c}"), &set);
    }
}

fn evaluate_json(pred: &Path, gt: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["evaluate", path_str(pred), path_str(gt), "--format", "json"];
    args.extend_from_slice(extra);
    let out = vimbench(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn evaluate_self_is_perfect_and_matches_schema() {
    let tmp = tempfile::tempdir().unwrap();
    gt_dataset(tmp.path(), 2);
    let report = evaluate_json(tmp.path(), tmp.path(), &["--video-matting"]);
    for xi in ["mse", "mad", "dtssd"] {
        assert_eq!(report["aggregate"]["vimq"][xi], 100.0);
    }
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn table_is_rendered_from_the_json_report() {
    let tmp = tempfile::tempdir().unwrap();
    gt_dataset(tmp.path(), 1);
    let json_path = tmp.path().join("report.json");
    let out = vimbench(&[
        "evaluate",
        path_str(tmp.path()),
        path_str(tmp.path()),
        "--json-out",
        path_str(&json_path),
    ]);
    assert!(out.status.success());
    let report: vimbench_core::report::ReportJson = serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), report.render_table());
}

#[test]
fn empty_predictions_score_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    let pred = tmp.path().join("pred");
    gt_dataset(&gt, 3);
    fs::create_dir_all(&pred).unwrap();
    let report = evaluate_json(&pred, &gt, &[]);
    assert_eq!(report["aggregate"]["vimq"]["mse"], 0.0);
    assert_eq!(report["aggregate"]["counts"]["fn"], 2 + 3 + 2);
    assert_eq!(report["aggregate"]["counts"]["tp"], 0);
}

#[test]
fn aggregate_is_mean_of_clips() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    let pred = tmp.path().join("pred");
    gt_dataset(&gt, 3);
    // Clip 0 perfect, clip 1 missing one instance, clip 2 blurred.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sets: Vec<_> = (0..3).map(|c| disc_scene(4, 2 + c % 2, 24, 48, &mut rng)).collect();
    write_pred_clip(&pred, "clip0", &sets[0]);
    let partial = vimbench_core::InstanceSet::from_sequences(sets[1].sequences().take(2).cloned()).unwrap();
    write_pred_clip(&pred, "clip1", &partial);
    let dimmed = vimbench_core::InstanceSet::from_sequences(sets[2].sequences().map(|s| {
        let frames = s
            .frames()
            .iter()
            .map(|f| vimbench_core::AlphaMatte::from_fn(f.height(), f.width(), |y, x| f.get(y, x) * 0.9))
            .collect();
        vimbench_core::MatteSequence::new(s.instance_id(), frames).unwrap()
    }))
    .unwrap();
    write_pred_clip(&pred, "clip2", &dimmed);
    let report = evaluate_json(&pred, &gt, &[]);
    for xi in ["mse", "mad", "dtssd"] {
        let mean: f64 = report["clips"].as_array().unwrap().iter().map(|c| c["vimq"][xi].as_f64().unwrap()).sum::<f64>() / 3.0;
        assert!((report["aggregate"]["vimq"][xi].as_f64().unwrap() - mean).abs() < 1e-9);
    }
    let pooled = evaluate_json(&pred, &gt, &["--pool"]);
    assert_eq!(pooled["aggregation"], "pooled");
}

#[test]
fn layout_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = vimbench(&["evaluate", path_str(tmp.path()), path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));

    let gt = tmp.path().join("gt");
    let pred = tmp.path().join("pred");
    gt_dataset(&gt, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let short = disc_scene(3, 2, 24, 48, &mut rng);
    write_gt_clip(&pred, "clip0", &short);
    let out = vimbench(&["evaluate", path_str(&pred), path_str(&gt)]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

fn composite_spec(dir: &Path, counts: &[usize], frames: usize, h: usize, w: usize) -> std::path::PathBuf {
    write_background(&dir.join("bg"), frames + 2, h / 2, w / 2);
    for k in 0..4 {
        write_foreground(&dir.join(format!("fg{k}")), frames + 1, h / 2, w / 3, k as u64);
    }
    let clips: Vec<Value> = counts
        .iter()
        .map(|&n| {
            json!({
                "background": "bg",
                "foregrounds": (0..n).map(|k| format!("fg{k}")).collect::<Vec<_>>(),
                "frames": frames,
                "width": w,
                "height": h,
            })
        })
        .collect();
    let path = dir.join("spec.json");
    fs::write(&path, serde_json::to_string_pretty(&json!({ "seed": 17, "clips": clips })).unwrap()).unwrap();
    path
}

#[test]
fn composite_benchmark_mix_and_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let mix = vimbench_core::compositor::benchmark_mix(50);
    let spec = composite_spec(tmp.path(), &mix, 2, 16, 24);
    let out_root = tmp.path().join("out");
    let out = vimbench(&["composite", path_str(&spec), path_str(&out_root)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut per_count = [0usize; 5];
    for (i, &n) in mix.iter().enumerate() {
        let m = vimbench_core::io::ClipManifest::read(&out_root.join(format!("clip{i:03}")).join("manifest.json")).unwrap();
        assert_eq!(m.gt_instances.len(), n);
        per_count[n] += 1;
    }
    assert_eq!(&per_count[2..], &[35, 10, 5]);
    let out = vimbench(&["validate", path_str(&out_root)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

fn tree_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_owned()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn composite_is_byte_reproducible_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = composite_spec(tmp.path(), &[2, 3, 4], 3, 20, 30);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(vimbench(&["--threads", "1", "composite", path_str(&spec), path_str(&a)]).status.success());
    assert!(vimbench(&["--threads", "4", "composite", path_str(&spec), path_str(&b)]).status.success());
    assert_eq!(tree_bytes(&a), tree_bytes(&b));
}

#[test]
fn composite_full_resolution_clip_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = composite_spec(tmp.path(), &[3], 50, 1080, 1920);
    let out_root = tmp.path().join("out");
    let out = vimbench(&["composite", path_str(&spec), path_str(&out_root)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let clip = out_root.join("clip000");
    let m = vimbench_core::io::ClipManifest::read(&clip.join("manifest.json")).unwrap();
    assert_eq!((m.frame_count, m.height, m.width, m.gt_instances.len()), (50, 1080, 1920, 3));
    let last = vimbench_core::io::load_rgb(&clip.join("comp/image/00049.png")).unwrap();
    assert_eq!(last.dims(), (1080, 1920));
}

#[test]
fn validate_failures_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = composite_spec(tmp.path(), &[2], 4, 24, 32);
    let out_root = tmp.path().join("out");
    assert!(vimbench(&["composite", path_str(&spec), path_str(&out_root)]).status.success());
    let clip = out_root.join("clip000");

    let zero = vimbench(&["validate", path_str(&clip), "--tolerance", "0"]);
    assert_eq!(zero.status.code(), Some(3));

    save_rgb(&RgbImage::filled(24, 32, [0.0, 1.0, 0.0]), &clip.join("comp/image/00002.png")).unwrap();
    let bad = vimbench(&["validate", path_str(&clip)]);
    assert_eq!(bad.status.code(), Some(3));
    let text = String::from_utf8(bad.stdout).unwrap();
    assert!(text.contains("failing frames [2]"), "{text}");

    fs::remove_file(clip.join("provenance.json")).unwrap();
    assert_eq!(vimbench(&["validate", path_str(&clip)]).status.code(), Some(3));
}

fn mask_dir(dir: &Path, frames: usize, h: usize, w: usize) -> MaskSequence {
    let seq = MaskSequence::new(
        (0..frames)
            .map(|t| BinaryMask::from_fn(h, w, |y, x| (y + t) % 9 < 4 && x > 10 && x < 70))
            .collect(),
    )
    .unwrap();
    save_mask_sequence(&seq, dir).unwrap();
    seq
}

#[test]
fn augment_salt_pepper_exact_count() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let output = tmp.path().join("out");
    let seq = mask_dir(&input, 3, 100, 100);
    let out = vimbench(&[
        "augment",
        path_str(&input),
        path_str(&output),
        "--salt-pepper",
        "0.25",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let noisy = load_mask_sequence(&output).unwrap();
    for (a, b) in seq.frames().iter().zip(noisy.frames()) {
        let flipped = a.bits().iter().zip(b.bits()).filter(|(x, y)| x != y).count();
        assert_eq!(flipped, 2500);
    }
    let no_seed = vimbench(&["augment", path_str(&input), path_str(&output), "--salt-pepper", "0.25"]);
    assert_eq!(no_seed.status.code(), Some(2));
}

#[test]
fn augment_with_zero_probabilities_copies_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let output = tmp.path().join("out");
    mask_dir(&input, 4, 40, 80);
    let cfg = tmp.path().join("cfg.json");
    let zero = json!({
        "seed": 9,
        "erase": {"probability": 0.0},
        "paste": {"probability": 0.0},
        "merge": {"probability": 0.0},
        "morph": {"probability": 0.0},
        "tmg": {"probability": 0.0}
    });
    fs::write(&cfg, zero.to_string()).unwrap();
    let out = vimbench(&["augment", path_str(&input), path_str(&output), "--config", path_str(&cfg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(tree_bytes(&input), tree_bytes(&output));

    let full = tmp.path().join("full.json");
    fs::write(&full, json!({"seed": 2}).to_string()).unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let out = vimbench(&["--threads", threads, "augment", path_str(&input), path_str(dir), "--config", path_str(&full)]);
        assert!(out.status.success());
    }
    assert_eq!(tree_bytes(&a), tree_bytes(&b));
}

#[test]
fn link_then_evaluate_is_perfect() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    let pred = tmp.path().join("pred");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let set = disc_scene(6, 3, 32, 96, &mut rng);
    write_gt_clip(&gt, "scene", &set);
    let merged_dir = tmp.path().join("merged");
    vimbench_core::io::save_matte_sequence(&merge_instances(&set).unwrap(), &merged_dir, vimbench_core::io::BitDepth::Sixteen).unwrap();
    let out = vimbench(&["link", path_str(&merged_dir), path_str(&pred.join("scene")), "--min-area", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = evaluate_json(&pred, &gt, &[]);
    assert_eq!(report["aggregate"]["vimq"]["mse"], 100.0);
    assert_eq!(report["aggregate"]["counts"]["id_switches"], 0);
}
