//! Recognition, tracking and matting quality and their product.

use serde::{Deserialize, Serialize};

use super::distance::similarity;
use super::matching::{match_prepared, MatchResult, MatchedPair, PairStats, Prepared};
use super::{FrameCost, MetricConfig, XiKind};
use crate::assignment::{hungarian_preferring, CostMatrix};
use crate::error::Result;
use crate::matte::InstanceSet;
use crate::reduce;

/// One value per similarity distance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerXi {
    pub mse: f64,
    pub mad: f64,
    pub dtssd: f64,
}

impl PerXi {
    pub fn get(&self, kind: XiKind) -> f64 {
        match kind {
            XiKind::Mse => self.mse,
            XiKind::Mad => self.mad,
            XiKind::Dtssd => self.dtssd,
        }
    }

    pub fn from_fn(mut f: impl FnMut(XiKind) -> f64) -> Self {
        Self {
            mse: f(XiKind::Mse),
            mad: f(XiKind::Mad),
            dtssd: f(XiKind::Dtssd),
        }
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_fn(|k| f(self.get(k)))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub id_switches: usize,
    pub frames: usize,
}

/// Scores of one true-positive pair, unit scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceScore {
    pub pred_id: String,
    pub gt_id: String,
    pub iou: f64,
    pub id_switches: usize,
    pub mq: PerXi,
}

/// Additive sufficient statistics of a VIMQ evaluation. Summing the totals
/// of several clips and converting once gives the instance-pooled score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VimqTotals {
    pub iou_sum: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub id_switches: usize,
    /// Σ over true positives of the clip length.
    pub tp_frames: usize,
    pub similarity_sum: PerXi,
    pub frames: usize,
}

impl VimqTotals {
    pub fn merge(&mut self, other: &VimqTotals) {
        self.iou_sum += other.iou_sum;
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.id_switches += other.id_switches;
        self.tp_frames += other.tp_frames;
        self.similarity_sum = PerXi::from_fn(|k| self.similarity_sum.get(k) + other.similarity_sum.get(k));
        self.frames += other.frames;
    }

    pub fn rq(&self) -> f64 {
        if self.tp == 0 {
            return 0.0;
        }
        let tp = self.tp as f64;
        (self.iou_sum / tp) * (tp / (tp + 0.5 * self.fp as f64 + 0.5 * self.fn_ as f64))
    }

    pub fn tq(&self) -> f64 {
        if self.tp_frames == 0 {
            return 1.0;
        }
        1.0 - self.id_switches as f64 / self.tp_frames as f64
    }

    pub fn mq(&self) -> PerXi {
        if self.tp_frames == 0 {
            return PerXi::default();
        }
        self.similarity_sum.map(|s| s / self.tp_frames as f64)
    }

    pub fn counts(&self) -> Counts {
        Counts {
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
            id_switches: self.id_switches,
            frames: self.frames,
        }
    }
}

/// All scores in `[0, 1]`; see [`crate::report::ReportJson`] for the ×100 form.
#[derive(Clone, Debug, PartialEq)]
pub struct VimqReport {
    pub rq: f64,
    pub tq: f64,
    pub mq: PerXi,
    pub vimq: PerXi,
    pub counts: Counts,
    pub per_instance: Vec<InstanceScore>,
    pub false_positives: Vec<String>,
    pub false_negatives: Vec<String>,
    pub totals: VimqTotals,
}

impl VimqReport {
    pub fn from_totals(totals: VimqTotals) -> Self {
        let (rq, tq, mq) = (totals.rq(), totals.tq(), totals.mq());
        Self {
            rq,
            tq,
            mq,
            vimq: mq.map(|m| rq * tq * m),
            counts: totals.counts(),
            per_instance: Vec::new(),
            false_positives: Vec::new(),
            false_negatives: Vec::new(),
            totals,
        }
    }

    /// Pools instances of several reports into one score.
    pub fn pooled<'a>(reports: impl IntoIterator<Item = &'a VimqReport>) -> Self {
        let mut totals = VimqTotals::default();
        for r in reports {
            totals.merge(&r.totals);
        }
        Self::from_totals(totals)
    }

    /// Unweighted mean of per-report scores; counts are summed.
    pub fn mean<'a>(reports: impl IntoIterator<Item = &'a VimqReport>) -> Self {
        let reports: Vec<_> = reports.into_iter().collect();
        let mut totals = VimqTotals::default();
        for r in &reports {
            totals.merge(&r.totals);
        }
        let n = reports.len().max(1) as f64;
        let mean = |f: &dyn Fn(&VimqReport) -> f64| reports.iter().map(|r| f(r)).sum::<f64>() / n;
        Self {
            rq: mean(&|r| r.rq),
            tq: mean(&|r| r.tq),
            mq: PerXi::from_fn(|k| mean(&|r| r.mq.get(k))),
            vimq: PerXi::from_fn(|k| mean(&|r| r.vimq.get(k))),
            counts: totals.counts(),
            per_instance: Vec::new(),
            false_positives: Vec::new(),
            false_negatives: Vec::new(),
            totals,
        }
    }
}

/// `RQ = (Σ IoU / N_TP) · N_TP / (N_TP + ½N_FP + ½N_FN)`, zero without true positives.
pub fn recognition_quality(m: &MatchResult) -> f64 {
    VimqTotals {
        iou_sum: m.tp.iter().map(|tp| tp.iou).sum(),
        tp: m.n_tp(),
        fp: m.n_fp(),
        fn_: m.n_fn(),
        ..Default::default()
    }
    .rq()
}

/// Frame-wise re-matching of true positives against every ground truth.
/// Returns the number of frames at which each listed pair deviates from
/// its sequence-level partner.
fn id_switches(prep: &Prepared, tp_pairs: &[(usize, usize)], cfg: &MetricConfig) -> Vec<usize> {
    let mut switches = vec![0; tp_pairs.len()];
    if tp_pairs.is_empty() {
        return switches;
    }
    let ng = prep.gt.len();
    let preferred: Vec<Option<usize>> = tp_pairs.iter().map(|&(_, g)| Some(g)).collect();
    let per_frame: Vec<Vec<bool>> = {
        use rayon::prelude::*;
        (0..prep.frames)
            .into_par_iter()
            .map(|t| {
                let costs = CostMatrix::from_fn(tp_pairs.len(), ng, |row, g| {
                    let p = tp_pairs[row].0;
                    match cfg.frame_cost {
                        FrameCost::L1 => prep.frame_l1[t][p * ng + g],
                        FrameCost::Iou => {
                            let s = reduce::pair_sums(
                                prep.pred[p].frames()[t].values(),
                                prep.gt[g].frames()[t].values(),
                                cfg.binarize_threshold,
                            );
                            1.0 - reduce::iou_from_counts(s.intersection, s.union)
                        }
                    }
                })
                .expect("frame costs are finite and non-negative");
                let assignment = hungarian_preferring(&costs, &preferred);
                (0..tp_pairs.len())
                    .map(|row| assignment.col_for_row(row) != Some(tp_pairs[row].1))
                    .collect()
            })
            .collect()
    };
    for frame in &per_frame {
        for (count, &switched) in switches.iter_mut().zip(frame) {
            *count += switched as usize;
        }
    }
    switches
}

fn tp_indices(prep: &Prepared, m: &MatchResult) -> Result<Vec<(usize, usize)>> {
    m.tp
        .iter()
        .map(|tp| Ok((prep.pred_index(&tp.pred_id)?, prep.gt_index(&tp.gt_id)?)))
        .collect()
}

/// `TQ = 1 − Σ IDS / (N_TP · T)`, one without true positives.
pub fn tracking_quality(
    pred: &InstanceSet,
    gt: &InstanceSet,
    m: &MatchResult,
    cfg: &MetricConfig,
) -> Result<f64> {
    cfg.validate()?;
    let prep = Prepared::new(pred, gt)?;
    let pairs = tp_indices(&prep, m)?;
    let ids: usize = id_switches(&prep, &pairs, cfg).iter().sum();
    Ok(VimqTotals {
        tp: pairs.len(),
        id_switches: ids,
        tp_frames: pairs.len() * prep.frames,
        ..Default::default()
    }
    .tq())
}

fn similarity_sum(stats: &PairStats, kind: XiKind, cfg: &MetricConfig) -> f64 {
    let xi = match kind {
        XiKind::Mse => &stats.mse,
        XiKind::Mad => &stats.mad,
        XiKind::Dtssd => &stats.dtssd,
    };
    let omega = cfg.omega(kind);
    xi.iter().map(|&x| similarity(x, omega)).sum()
}

/// `MQ = Σ_TP Σ_t S / (N_TP · T)`, zero without true positives.
pub fn matting_quality(
    pred: &InstanceSet,
    gt: &InstanceSet,
    m: &MatchResult,
    kind: XiKind,
    cfg: &MetricConfig,
) -> Result<f64> {
    cfg.validate()?;
    let prep = Prepared::new(pred, gt)?;
    let pairs = tp_indices(&prep, m)?;
    let total: f64 = pairs
        .iter()
        .map(|&(p, g)| {
            let stats = PairStats::compute(prep.pred[p], prep.gt[g], cfg.binarize_threshold);
            similarity_sum(&stats, kind, cfg)
        })
        .sum();
    let mut sums = PerXi::default();
    match kind {
        XiKind::Mse => sums.mse = total,
        XiKind::Mad => sums.mad = total,
        XiKind::Dtssd => sums.dtssd = total,
    }
    Ok(VimqTotals {
        tp: pairs.len(),
        tp_frames: pairs.len() * prep.frames,
        similarity_sum: sums,
        ..Default::default()
    }
    .mq()
    .get(kind))
}

/// Full VIMQ evaluation of one clip.
pub fn vimq(pred: &InstanceSet, gt: &InstanceSet, cfg: &MetricConfig) -> Result<VimqReport> {
    cfg.validate()?;
    let prep = Prepared::new(pred, gt)?;
    let (matches, pairs) = match_prepared(&prep, cfg);
    let tp_pairs: Vec<&MatchedPair> = pairs.iter().filter(|p| p.tp).collect();
    let indices: Vec<(usize, usize)> = tp_pairs.iter().map(|p| (p.pred, p.gt)).collect();
    let switches = id_switches(&prep, &indices, cfg);

    let t = prep.frames;
    let mut totals = VimqTotals {
        tp: matches.n_tp(),
        fp: matches.n_fp(),
        fn_: matches.n_fn(),
        tp_frames: matches.n_tp() * t,
        frames: t,
        ..Default::default()
    };
    let mut per_instance = Vec::with_capacity(tp_pairs.len());
    for ((pair, tp), &ids) in tp_pairs.iter().zip(&matches.tp).zip(&switches) {
        let sums = PerXi::from_fn(|k| similarity_sum(&pair.stats, k, cfg));
        totals.iou_sum += tp.iou;
        totals.id_switches += ids;
        totals.similarity_sum = PerXi::from_fn(|k| totals.similarity_sum.get(k) + sums.get(k));
        per_instance.push(InstanceScore {
            pred_id: tp.pred_id.clone(),
            gt_id: tp.gt_id.clone(),
            iou: tp.iou,
            id_switches: ids,
            mq: sums.map(|s| s / t as f64),
        });
    }
    let mut report = VimqReport::from_totals(totals);
    report.per_instance = per_instance;
    report.false_positives = matches.fp_ids;
    report.false_negatives = matches.fn_ids;
    Ok(report)
}
