//! Robustness of VIMQ to noisy mask guidance.
//!
//! Each ground-truth instance is binarised and perturbed with salt-and-pepper
//! noise. The resulting "prediction" keeps the true alpha where the mask bit
//! survived, is opaque where a bit was added and empty where one was removed.

use serde::{Deserialize, Serialize};

use crate::augment::salt_pepper;
use crate::error::Result;
use crate::matte::{AlphaMatte, InstanceSet, MaskSequence, MatteSequence};
use crate::metrics::{vimq, MetricConfig, VimqReport};

/// Fractions used by the standard sweep.
pub const DEFAULT_FRACTIONS: [f64; 4] = [0.0, 0.05, 0.15, 0.25];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub fraction: f64,
    pub report: VimqReport,
}

/// Compact ×100 summary of one sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub rq: f64,
    pub tq: f64,
    pub vimq_mse: f64,
    pub vimq_mad: f64,
    pub vimq_dtssd: f64,
}

impl From<&SweepPoint> for SweepRow {
    fn from(p: &SweepPoint) -> Self {
        Self {
            fraction: p.fraction,
            rq: p.report.rq * 100.0,
            tq: p.report.tq * 100.0,
            vimq_mse: p.report.vimq.mse * 100.0,
            vimq_mad: p.report.vimq.mad * 100.0,
            vimq_dtssd: p.report.vimq.dtssd * 100.0,
        }
    }
}

/// Alpha prediction implied by perturbed guidance `noisy` of clean mask `clean`.
pub fn guidance_prediction(gt: &MatteSequence, clean: &MaskSequence, noisy: &MaskSequence) -> Result<MatteSequence> {
    let frames = gt
        .frames()
        .iter()
        .zip(clean.frames().iter().zip(noisy.frames()))
        .map(|(a, (c, n))| {
            let values = a
                .values()
                .iter()
                .zip(c.bits().iter().zip(n.bits()))
                .map(|(&v, (&was, &now))| match (was, now) {
                    (false, true) => 1.0,
                    (true, false) => 0.0,
                    _ => v,
                })
                .collect();
            AlphaMatte::new(a.height(), a.width(), values)
        })
        .collect::<Result<Vec<_>>>()?;
    MatteSequence::new(gt.instance_id(), frames)
}

/// Perturbs every instance with each fraction and evaluates against `gt`.
/// Instance `k` uses stream `seed + k`, so flip sets are nested across fractions.
pub fn robustness_sweep(gt: &InstanceSet, fractions: &[f64], seed: u64, cfg: &MetricConfig) -> Result<Vec<SweepPoint>> {
    let clean: Vec<MaskSequence> = gt.sequences().map(|s| s.binarize(cfg.binarize_threshold)).collect();
    fractions
        .iter()
        .map(|&fraction| {
            let pred = gt
                .sequences()
                .zip(&clean)
                .enumerate()
                .map(|(k, (seq, mask))| {
                    let noisy = salt_pepper(mask, fraction, seed.wrapping_add(k as u64))?;
                    guidance_prediction(seq, mask, &noisy)
                })
                .collect::<Result<Vec<_>>>()?;
            let pred = InstanceSet::from_sequences(pred)?;
            Ok(SweepPoint {
                fraction,
                report: vimq(&pred, gt, cfg)?,
            })
        })
        .collect()
}
