use std::path::Path;

use rayon::prelude::*;
use vimbench_core::io::{list_clips, load_instance_set, ClipManifest, DatasetManifest, Side, MANIFEST_FILE};
use vimbench_core::metrics::{merge_instances, video_matting_metrics, vimq, MetricConfig, VideoMattingMetrics};
use vimbench_core::report::{Aggregation, ReportJson};
use vimbench_core::{Error, VimqReport};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default)]
pub struct EvaluateOptions {
    pub config: MetricConfig,
    pub aggregation: Aggregation,
    pub video_matting: bool,
}

/// A prediction manifest, when present, must describe the same clip.
fn check_pred_manifest(manifest: &DatasetManifest) -> CliResult<()> {
    let path = manifest.clip_dir(Side::Pred).join(MANIFEST_FILE);
    if !path.is_file() {
        return Ok(());
    }
    let pred = ClipManifest::read(&path)?;
    let gt = &manifest.clip;
    if (pred.frame_count, pred.height, pred.width) != (gt.frame_count, gt.height, gt.width) {
        return Err(Error::ShapeMismatch(format!(
            "prediction manifest for `{}` is {}x{}x{}, ground truth is {}x{}x{}",
            gt.clip_id, pred.frame_count, pred.height, pred.width, gt.frame_count, gt.height, gt.width
        ))
        .into());
    }
    Ok(())
}

fn evaluate_clip(
    gt_root: &Path,
    pred_root: &Path,
    clip_id: &str,
    opts: &EvaluateOptions,
) -> CliResult<(String, VimqReport, Option<VideoMattingMetrics>)> {
    let manifest = DatasetManifest::open(gt_root, pred_root, clip_id)?;
    check_pred_manifest(&manifest)?;
    let gt = load_instance_set(&manifest, Side::Gt)?;
    let pred = load_instance_set(&manifest, Side::Pred)?;
    let report = vimq(&pred, &gt, &opts.config)?;
    let vm = if opts.video_matting {
        Some(video_matting_metrics(&merge_instances(&pred)?, &merge_instances(&gt)?)?)
    } else {
        None
    };
    Ok((clip_id.to_owned(), report, vm))
}

/// Evaluates every clip under `gt_root`; results keep the sorted clip order.
pub fn cmd_evaluate(pred_root: &Path, gt_root: &Path, opts: &EvaluateOptions) -> CliResult<ReportJson> {
    opts.config.validate()?;
    let clips = list_clips(gt_root)?;
    if clips.is_empty() {
        return Err(Error::InvalidValue(format!("no clip manifests under {}", gt_root.display())).into());
    }
    if !pred_root.is_dir() {
        return Err(Error::InvalidValue(format!("prediction root {} is not a directory", pred_root.display())).into());
    }
    let results = clips
        .par_iter()
        .map(|c| evaluate_clip(gt_root, pred_root, c, opts))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(ReportJson::build(&opts.config, opts.aggregation, &results))
}
