//! VIMQ = RQ · TQ · MQ over predicted and ground-truth instance sets,
//! plus the conventional video-matting metrics over merged mattes.

mod distance;
mod matching;
mod quality;
mod video;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matte::{AlphaMatte, BinaryMask};

pub use distance::{similarity, xi_dtssd, xi_mad, xi_mse};
pub use matching::{match_instances, MatchResult, TruePositive};
pub use quality::{
    matting_quality, recognition_quality, tracking_quality, vimq, Counts, InstanceScore, PerXi,
    VimqReport, VimqTotals,
};
pub use video::{gradient_magnitude, merge_instances, video_matting_metrics, VideoMattingMetrics};

/// Cost used by the frame-wise matching behind tracking quality.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameCost {
    /// Mean absolute alpha difference, mirroring the sequence-level cost.
    #[default]
    L1,
    /// One minus the IoU of the binarized frames.
    Iou,
}

/// Which per-frame distance feeds the similarity `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XiKind {
    Mse,
    Mad,
    Dtssd,
}

impl XiKind {
    pub const ALL: [XiKind; 3] = [XiKind::Mse, XiKind::Mad, XiKind::Dtssd];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    /// A matched pair is a true positive when its sequence IoU is strictly above this.
    pub rho: f64,
    pub omega_mse: f64,
    pub omega_mad: f64,
    pub omega_dtssd: f64,
    /// Pixels strictly above this value are foreground after binarization.
    pub binarize_threshold: f32,
    pub frame_cost: FrameCost,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            rho: 0.5,
            omega_mse: 50.0,
            omega_mad: 50.0,
            omega_dtssd: 10.0,
            binarize_threshold: 0.0,
            frame_cost: FrameCost::L1,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "rho must lie in (0, 1), got {}",
                self.rho
            )));
        }
        for (name, w) in [
            ("omega_mse", self.omega_mse),
            ("omega_mad", self.omega_mad),
            ("omega_dtssd", self.omega_dtssd),
        ] {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {w}")));
            }
        }
        if !self.binarize_threshold.is_finite() {
            return Err(Error::InvalidConfig("binarize_threshold must be finite".into()));
        }
        Ok(())
    }

    pub fn omega(&self, kind: XiKind) -> f64 {
        match kind {
            XiKind::Mse => self.omega_mse,
            XiKind::Mad => self.omega_mad,
            XiKind::Dtssd => self.omega_dtssd,
        }
    }
}

/// Bit set iff the alpha value is strictly above `threshold`.
pub fn binarize(matte: &AlphaMatte, threshold: f32) -> BinaryMask {
    BinaryMask::new(
        matte.height(),
        matte.width(),
        matte.values().iter().map(|&v| v > threshold).collect(),
    )
    .expect("dimensions come from a valid matte")
}
