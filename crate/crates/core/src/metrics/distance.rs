use crate::error::{Error, Result};
use crate::matte::AlphaMatte;
use crate::reduce;

fn same_dims(frames: &[&AlphaMatte]) -> Result<()> {
    let dims = frames[0].dims();
    if frames.iter().any(|f| f.dims() != dims) {
        return Err(Error::shape(format!(
            "frames have dimensions {:?}",
            frames.iter().map(|f| f.dims()).collect::<Vec<_>>()
        )));
    }
    Ok(())
}

/// Mean absolute difference between two frames.
pub fn xi_mad(gt: &AlphaMatte, pred: &AlphaMatte) -> Result<f64> {
    same_dims(&[gt, pred])?;
    Ok(reduce::sum_abs_diff(pred.values(), gt.values()) / gt.len() as f64)
}

/// Mean squared difference between two frames.
pub fn xi_mse(gt: &AlphaMatte, pred: &AlphaMatte) -> Result<f64> {
    same_dims(&[gt, pred])?;
    Ok(reduce::sum_sq_diff(pred.values(), gt.values()) / gt.len() as f64)
}

/// Root mean squared difference of the temporal gradients of prediction
/// and ground truth between two consecutive frames.
pub fn xi_dtssd(
    gt_prev: &AlphaMatte,
    gt_cur: &AlphaMatte,
    pred_prev: &AlphaMatte,
    pred_cur: &AlphaMatte,
) -> Result<f64> {
    same_dims(&[gt_prev, gt_cur, pred_prev, pred_cur])?;
    let sum = reduce::sum_sq_temporal_diff(
        pred_prev.values(),
        pred_cur.values(),
        gt_prev.values(),
        gt_cur.values(),
    );
    Ok((sum / gt_cur.len() as f64).sqrt())
}

/// `S = 1 − min(1, ω·ξ)`.
pub fn similarity(xi: f64, omega: f64) -> f64 {
    1.0 - (omega * xi).min(1.0)
}
