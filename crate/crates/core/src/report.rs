//! Serializable evaluation reports on the ×100 scale, and the text table
//! rendered from them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::metrics::{Counts, MetricConfig, PerXi, VideoMattingMetrics, VimqReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub pred_id: String,
    pub gt_id: String,
    pub iou: f64,
    pub id_switches: usize,
    pub mq: PerXi,
}

/// Scores of one clip or of an aggregate, ×100.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreJson {
    pub rq: f64,
    pub tq: f64,
    pub mq: PerXi,
    pub vimq: PerXi,
    pub counts: Counts,
    pub per_instance: Vec<InstanceJson>,
    pub false_positives: Vec<String>,
    pub false_negatives: Vec<String>,
}

impl From<&VimqReport> for ScoreJson {
    fn from(r: &VimqReport) -> Self {
        let pct = |v: f64| v * 100.0;
        Self {
            rq: pct(r.rq),
            tq: pct(r.tq),
            mq: r.mq.map(pct),
            vimq: r.vimq.map(pct),
            counts: r.counts,
            per_instance: r
                .per_instance
                .iter()
                .map(|s| InstanceJson {
                    pred_id: s.pred_id.clone(),
                    gt_id: s.gt_id.clone(),
                    iou: pct(s.iou),
                    id_switches: s.id_switches,
                    mq: s.mq.map(pct),
                })
                .collect(),
            false_positives: r.false_positives.clone(),
            false_negatives: r.false_negatives.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipJson {
    pub clip_id: String,
    #[serde(flatten)]
    pub scores: ScoreJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_matting: Option<VideoMattingMetrics>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Unweighted mean of clip scores.
    #[default]
    Mean,
    /// Instance statistics summed across clips before scoring.
    Pooled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub schema_version: u32,
    pub config: MetricConfig,
    pub aggregation: Aggregation,
    pub aggregate: ScoreJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_matting: Option<VideoMattingMetrics>,
    pub clips: Vec<ClipJson>,
}

impl ReportJson {
    /// Builds the dataset report from per-clip results in manifest order.
    pub fn build(
        config: &MetricConfig,
        aggregation: Aggregation,
        clips: &[(String, VimqReport, Option<VideoMattingMetrics>)],
    ) -> Self {
        let reports = clips.iter().map(|(_, r, _)| r);
        let aggregate = match aggregation {
            Aggregation::Mean => VimqReport::mean(reports),
            Aggregation::Pooled => VimqReport::pooled(reports),
        };
        let vm: Vec<VideoMattingMetrics> = clips.iter().filter_map(|c| c.2).collect();
        let video_matting = (!vm.is_empty() && vm.len() == clips.len()).then(|| {
            let n = vm.len() as f64;
            VideoMattingMetrics {
                mad: vm.iter().map(|m| m.mad).sum::<f64>() / n,
                mse: vm.iter().map(|m| m.mse).sum::<f64>() / n,
                grad: vm.iter().map(|m| m.grad).sum::<f64>() / n,
                dtssd: vm.iter().map(|m| m.dtssd).sum::<f64>() / n,
            }
        });
        Self {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            aggregation,
            aggregate: ScoreJson::from(&aggregate),
            video_matting,
            clips: clips
                .iter()
                .map(|(id, r, vm)| ClipJson {
                    clip_id: id.clone(),
                    scores: ScoreJson::from(r),
                    video_matting: *vm,
                })
                .collect(),
        }
    }

    /// Fixed-width text table with two decimals.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let header = format!(
            "{:<16} {:>7} {:>7} {:>8} {:>8} {:>8} {:>9} {:>9} {:>9} {:>4} {:>4} {:>4} {:>5}",
            "clip", "RQ", "TQ", "MQ_mse", "MQ_mad", "MQ_dt", "VIMQ_mse", "VIMQ_mad", "VIMQ_dt", "TP", "FP", "FN", "IDS"
        );
        let _ = writeln!(out, "{header}");
        let _ = writeln!(out, "{}", "-".repeat(header.len()));
        let mut row = |name: &str, s: &ScoreJson| {
            let _ = writeln!(
                out,
                "{:<16} {:>7.2} {:>7.2} {:>8.2} {:>8.2} {:>8.2} {:>9.2} {:>9.2} {:>9.2} {:>4} {:>4} {:>4} {:>5}",
                name,
                s.rq,
                s.tq,
                s.mq.mse,
                s.mq.mad,
                s.mq.dtssd,
                s.vimq.mse,
                s.vimq.mad,
                s.vimq.dtssd,
                s.counts.tp,
                s.counts.fp,
                s.counts.fn_,
                s.counts.id_switches
            );
        };
        for c in &self.clips {
            row(&c.clip_id, &c.scores);
        }
        let label = match self.aggregation {
            Aggregation::Mean => "mean",
            Aggregation::Pooled => "pooled",
        };
        row(label, &self.aggregate);
        if let Some(vm) = &self.video_matting {
            let _ = writeln!(
                out,
                "\nvideo matting (merged instances): MAD {:.2}  MSE {:.2}  Grad {:.2}  dtSSD {:.2}",
                vm.mad, vm.mse, vm.grad, vm.dtssd
            );
        }
        out
    }
}
