//! Sequence-level matching of predicted to ground-truth instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MetricConfig;
use crate::assignment::{hungarian, CostMatrix};
use crate::error::{Error, Result};
use crate::matte::{InstanceSet, MatteSequence};
use crate::reduce;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruePositive {
    pub pred_id: String,
    pub gt_id: String,
    /// Frame-averaged IoU of the binarized sequences.
    pub iou: f64,
}

/// True positives (ordered by ground-truth id), false positives and false negatives.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub tp: Vec<TruePositive>,
    pub fp_ids: Vec<String>,
    pub fn_ids: Vec<String>,
}

impl MatchResult {
    pub fn n_tp(&self) -> usize {
        self.tp.len()
    }

    pub fn n_fp(&self) -> usize {
        self.fp_ids.len()
    }

    pub fn n_fn(&self) -> usize {
        self.fn_ids.len()
    }
}

/// Per-frame statistics of one (prediction, ground truth) pair.
#[derive(Clone, Debug, Default)]
pub(crate) struct PairStats {
    pub iou: Vec<f64>,
    pub mad: Vec<f64>,
    pub mse: Vec<f64>,
    /// Zero at the first frame.
    pub dtssd: Vec<f64>,
}

impl PairStats {
    pub fn compute(pred: &MatteSequence, gt: &MatteSequence, threshold: f32) -> Self {
        let pixels = gt.frames()[0].len() as f64;
        let per_frame: Vec<(f64, f64, f64, f64)> = (0..gt.frame_count())
            .into_par_iter()
            .map(|t| {
                let (p, g) = (pred.frames()[t].values(), gt.frames()[t].values());
                let s = reduce::pair_sums(p, g, threshold);
                let dt = if t == 0 {
                    0.0
                } else {
                    let sum = reduce::sum_sq_temporal_diff(
                        pred.frames()[t - 1].values(),
                        p,
                        gt.frames()[t - 1].values(),
                        g,
                    );
                    (sum / pixels).sqrt()
                };
                (
                    reduce::iou_from_counts(s.intersection, s.union),
                    s.abs / pixels,
                    s.sq / pixels,
                    dt,
                )
            })
            .collect();
        let mut out = PairStats::default();
        for (iou, mad, mse, dt) in per_frame {
            out.iou.push(iou);
            out.mad.push(mad);
            out.mse.push(mse);
            out.dtssd.push(dt);
        }
        out
    }

    pub fn mean_iou(&self) -> f64 {
        self.iou.iter().sum::<f64>() / self.iou.len() as f64
    }
}

/// Both sides of an evaluation with the shared per-frame L1 table.
pub(crate) struct Prepared<'a> {
    pub pred: Vec<&'a MatteSequence>,
    pub gt: Vec<&'a MatteSequence>,
    pub frames: usize,
    /// `frame_l1[t][p * gt.len() + g]` is the mean absolute difference at frame `t`.
    pub frame_l1: Vec<Vec<f64>>,
}

impl<'a> Prepared<'a> {
    pub fn new(pred: &'a InstanceSet, gt: &'a InstanceSet) -> Result<Self> {
        if !pred.is_empty() && !gt.is_empty() && !pred.same_shape(gt) {
            return Err(Error::shape(format!(
                "prediction set is {}x{:?}, ground truth is {}x{:?}",
                pred.frame_count(),
                pred.dims(),
                gt.frame_count(),
                gt.dims()
            )));
        }
        let pred: Vec<_> = pred.sequences().collect();
        let gt_seqs: Vec<_> = gt.sequences().collect();
        let frames = gt.frame_count();
        let frame_l1 = if pred.is_empty() || gt_seqs.is_empty() {
            Vec::new()
        } else {
            let pixels = (gt.height() * gt.width()) as f64;
            (0..frames)
                .into_par_iter()
                .map(|t| {
                    let mut row = Vec::with_capacity(pred.len() * gt_seqs.len());
                    for p in &pred {
                        for g in &gt_seqs {
                            row.push(
                                reduce::sum_abs_diff(p.frames()[t].values(), g.frames()[t].values())
                                    / pixels,
                            );
                        }
                    }
                    row
                })
                .collect()
        };
        Ok(Self {
            pred,
            gt: gt_seqs,
            frames,
            frame_l1,
        })
    }

    pub fn pred_index(&self, id: &str) -> Result<usize> {
        self.pred
            .iter()
            .position(|s| s.instance_id() == id)
            .ok_or_else(|| Error::UnknownInstance(id.to_owned()))
    }

    pub fn gt_index(&self, id: &str) -> Result<usize> {
        self.gt
            .iter()
            .position(|s| s.instance_id() == id)
            .ok_or_else(|| Error::UnknownInstance(id.to_owned()))
    }

    pub fn sequence_costs(&self) -> CostMatrix {
        let (np, ng) = (self.pred.len(), self.gt.len());
        CostMatrix::from_fn(np, ng, |p, g| {
            let total: f64 = self.frame_l1.iter().map(|row| row[p * ng + g]).sum();
            total / self.frames as f64
        })
        .expect("mean absolute differences are finite and non-negative")
    }
}

/// A Hungarian-matched pair with its statistics; `tp` records whether it
/// cleared the IoU threshold.
pub(crate) struct MatchedPair {
    pub pred: usize,
    pub gt: usize,
    pub tp: bool,
    pub stats: PairStats,
}

pub(crate) fn match_prepared(prep: &Prepared, cfg: &MetricConfig) -> (MatchResult, Vec<MatchedPair>) {
    let assignment = hungarian(&prep.sequence_costs());
    let mut pairs: Vec<MatchedPair> = assignment
        .pairs
        .iter()
        .map(|&(p, g)| {
            let stats = PairStats::compute(prep.pred[p], prep.gt[g], cfg.binarize_threshold);
            let tp = stats.mean_iou() > cfg.rho;
            MatchedPair { pred: p, gt: g, tp, stats }
        })
        .collect();
    pairs.sort_by_key(|pair| pair.gt);

    let mut result = MatchResult::default();
    let mut pred_is_tp = vec![false; prep.pred.len()];
    let mut gt_is_tp = vec![false; prep.gt.len()];
    for pair in pairs.iter().filter(|pair| pair.tp) {
        pred_is_tp[pair.pred] = true;
        gt_is_tp[pair.gt] = true;
        result.tp.push(TruePositive {
            pred_id: prep.pred[pair.pred].instance_id().to_owned(),
            gt_id: prep.gt[pair.gt].instance_id().to_owned(),
            iou: pair.stats.mean_iou(),
        });
    }
    result.fp_ids = prep
        .pred
        .iter()
        .zip(&pred_is_tp)
        .filter(|(_, &tp)| !tp)
        .map(|(s, _)| s.instance_id().to_owned())
        .collect();
    result.fn_ids = prep
        .gt
        .iter()
        .zip(&gt_is_tp)
        .filter(|(_, &tp)| !tp)
        .map(|(s, _)| s.instance_id().to_owned())
        .collect();
    (result, pairs)
}

/// Minimum-cost maximal matching on sequence-averaged L1 distances; matched
/// pairs whose binarized sequence IoU exceeds `rho` become true positives,
/// the others count as one false positive and one false negative.
pub fn match_instances(pred: &InstanceSet, gt: &InstanceSet, cfg: &MetricConfig) -> Result<MatchResult> {
    cfg.validate()?;
    let prep = Prepared::new(pred, gt)?;
    Ok(match_prepared(&prep, cfg).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matte::AlphaMatte;

    fn blob_seq(id: &str, frames: usize, rows: std::ops::Range<usize>) -> MatteSequence {
        let m = AlphaMatte::from_fn(10, 10, |y, _| if rows.contains(&y) { 0.8 } else { 0.0 });
        MatteSequence::new(id, vec![m; frames]).unwrap()
    }

    #[test]
    fn identity_gives_all_true_positives() {
        let gt = InstanceSet::from_sequences([blob_seq("a", 3, 0..3), blob_seq("b", 3, 5..9)]).unwrap();
        let m = match_instances(&gt, &gt, &MetricConfig::default()).unwrap();
        assert_eq!((m.n_tp(), m.n_fp(), m.n_fn()), (2, 0, 0));
        assert!(m.tp.iter().all(|tp| tp.iou == 1.0 && tp.pred_id == tp.gt_id));
    }

    #[test]
    fn empty_prediction_side() {
        let gt = InstanceSet::from_sequences([
            blob_seq("a", 2, 0..2),
            blob_seq("b", 2, 3..5),
            blob_seq("c", 2, 6..8),
        ])
        .unwrap();
        let pred = InstanceSet::empty(2, 10, 10);
        let m = match_instances(&pred, &gt, &MetricConfig::default()).unwrap();
        assert_eq!((m.n_tp(), m.n_fp(), m.n_fn()), (0, 0, 3));
        let m = match_instances(&gt, &InstanceSet::empty(7, 1, 1), &MetricConfig::default()).unwrap();
        assert_eq!((m.n_tp(), m.n_fp(), m.n_fn()), (0, 3, 0));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = InstanceSet::from_sequences([blob_seq("a", 2, 0..2)]).unwrap();
        let b = InstanceSet::from_sequences([blob_seq("a", 3, 0..2)]).unwrap();
        assert!(matches!(
            match_instances(&a, &b, &MetricConfig::default()),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn pair_below_threshold_is_fp_and_fn() {
        // Per-frame IoUs 0.48 and 0.50 average to 0.49: gt covers the whole
        // frame and the prediction keeps the first n pixels in raster order.
        let gt_frame = AlphaMatte::filled(10, 10, 1.0);
        let keep = |n: usize| AlphaMatte::from_fn(10, 10, |y, x| if y * 10 + x < n { 1.0 } else { 0.0 });
        let gt = InstanceSet::from_sequences([MatteSequence::new("g", vec![gt_frame; 2]).unwrap()]).unwrap();
        let pred = InstanceSet::from_sequences([MatteSequence::new("p", vec![keep(48), keep(50)]).unwrap()]).unwrap();
        let oracle = (48.0 / 100.0 + 50.0 / 100.0) / 2.0;
        assert_eq!(oracle, 0.49);
        let m = match_instances(&pred, &gt, &MetricConfig::default()).unwrap();
        assert_eq!((m.n_tp(), m.n_fp(), m.n_fn()), (0, 1, 1));
    }
}
