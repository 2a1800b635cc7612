//! Fixed-order pixel reductions.
//!
//! Every kernel walks its inputs front to back with four independent `f64`
//! lanes that are combined in a fixed order, so results are bit-identical
//! regardless of how callers parallelise across frames or instances.

const LANES: usize = 4;

#[inline]
fn combine(lanes: [f64; LANES]) -> f64 {
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3])
}

/// Σ |a − b|.
pub(crate) fn sum_abs_diff(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; LANES];
    let mut ca = a.chunks_exact(LANES);
    let mut cb = b.chunks_exact(LANES);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..LANES {
            acc[k] += (x[k] as f64 - y[k] as f64).abs();
        }
    }
    for (k, (x, y)) in ca.remainder().iter().zip(cb.remainder()).enumerate() {
        acc[k] += (*x as f64 - *y as f64).abs();
    }
    combine(acc)
}

/// Σ (a − b)².
pub(crate) fn sum_sq_diff(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; LANES];
    let mut ca = a.chunks_exact(LANES);
    let mut cb = b.chunks_exact(LANES);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..LANES {
            let d = x[k] as f64 - y[k] as f64;
            acc[k] += d * d;
        }
    }
    for (k, (x, y)) in ca.remainder().iter().zip(cb.remainder()).enumerate() {
        let d = *x as f64 - *y as f64;
        acc[k] += d * d;
    }
    combine(acc)
}

/// Σ ((pc − pp) − (gc − gp))².
pub(crate) fn sum_sq_temporal_diff(pp: &[f32], pc: &[f32], gp: &[f32], gc: &[f32]) -> f64 {
    debug_assert!(pp.len() == pc.len() && gp.len() == gc.len() && pp.len() == gp.len());
    let mut acc = [0.0f64; LANES];
    for (i, (((a, b), c), d)) in pp.iter().zip(pc).zip(gp).zip(gc).enumerate() {
        let diff = (*b as f64 - *a as f64) - (*d as f64 - *c as f64);
        acc[i % LANES] += diff * diff;
    }
    combine(acc)
}

/// Per-pixel statistics between a predicted and a ground-truth frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct PairSums {
    pub abs: f64,
    pub sq: f64,
    pub intersection: u64,
    pub union: u64,
}

/// One pass computing Σ|p − g|, Σ(p − g)² and the intersection/union counts
/// of the masks `p > threshold`, `g > threshold`.
pub(crate) fn pair_sums(pred: &[f32], gt: &[f32], threshold: f32) -> PairSums {
    debug_assert_eq!(pred.len(), gt.len());
    let mut abs = [0.0f64; LANES];
    let mut sq = [0.0f64; LANES];
    let mut inter = 0u64;
    let mut union = 0u64;
    for (i, (&p, &g)) in pred.iter().zip(gt).enumerate() {
        let d = p as f64 - g as f64;
        abs[i % LANES] += d.abs();
        sq[i % LANES] += d * d;
        let (bp, bg) = (p > threshold, g > threshold);
        inter += (bp & bg) as u64;
        union += (bp | bg) as u64;
    }
    PairSums {
        abs: combine(abs),
        sq: combine(sq),
        intersection: inter,
        union,
    }
}

/// Intersection over union with the empty-vs-empty convention of 1.
pub(crate) fn iou_from_counts(intersection: u64, union: u64) -> f64 {
    if union == 0 {
        1.0
    } else {
        intersection as f64 / union as f64
    }
}
