//! Conventional video-matting metrics over instance-merged mattes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::{xi_dtssd, xi_mad, xi_mse};
use crate::error::{Error, Result};
use crate::matte::{AlphaMatte, InstanceSet, MatteSequence};

/// Per pixel `min(1, Σ_i α_i)` at every frame.
pub fn merge_instances(set: &InstanceSet) -> Result<MatteSequence> {
    if set.frame_count() == 0 {
        return Err(Error::shape("cannot merge a zero-length instance set"));
    }
    let (h, w) = set.dims();
    let seqs: Vec<_> = set.sequences().collect();
    let frames = (0..set.frame_count())
        .map(|t| {
            let mut acc = vec![0.0f64; h * w];
            for s in &seqs {
                for (a, &v) in acc.iter_mut().zip(s.frames()[t].values()) {
                    *a += v as f64;
                }
            }
            AlphaMatte::from_raw(h, w, acc.into_iter().map(|v| v.min(1.0) as f32).collect())
        })
        .collect();
    MatteSequence::new("merged", frames)
}

/// MAD and MSE ×10³, Grad ×10³ and dtSSD ×10², each averaged over frames.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VideoMattingMetrics {
    pub mad: f64,
    pub mse: f64,
    pub grad: f64,
    pub dtssd: f64,
}

const GRAD_SIGMA: f64 = 1.4;

fn gauss(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Separable first-order Gaussian derivative filter pair `(smooth, derivative)`,
/// normalised so the outer product has unit L2 norm.
pub(crate) fn gaussian_derivative_kernels(sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let epsilon = 1e-2f64;
    let half = (sigma * (-2.0 * ((2.0 * std::f64::consts::PI).sqrt() * sigma * epsilon).ln()).sqrt())
        .ceil() as isize;
    let offsets = -half..=half;
    let smooth: Vec<f64> = offsets.clone().map(|u| gauss(u as f64, sigma)).collect();
    let deriv: Vec<f64> = offsets
        .map(|u| -(u as f64) * gauss(u as f64, sigma) / (sigma * sigma))
        .collect();
    let unit = |v: Vec<f64>| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect::<Vec<_>>()
    };
    (unit(smooth), unit(deriv))
}

/// 1-D correlation along rows (`horizontal`) or columns with replicated borders.
fn filter_1d(src: &[f64], h: usize, w: usize, kernel: &[f64], horizontal: bool) -> Vec<f64> {
    let half = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let off = k as isize - half;
                let (yy, xx) = if horizontal {
                    (y as isize, (x as isize + off).clamp(0, w as isize - 1))
                } else {
                    ((y as isize + off).clamp(0, h as isize - 1), x as isize)
                };
                acc += kv * src[yy as usize * w + xx as usize];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Gradient magnitude under Gaussian derivative filters with σ = 1.4.
pub fn gradient_magnitude(matte: &AlphaMatte) -> Vec<f64> {
    let (h, w) = matte.dims();
    let (smooth, deriv) = gaussian_derivative_kernels(GRAD_SIGMA);
    let src: Vec<f64> = matte.values().iter().map(|&v| v as f64).collect();
    let gx = filter_1d(&filter_1d(&src, h, w, &deriv, true), h, w, &smooth, false);
    let gy = filter_1d(&filter_1d(&src, h, w, &smooth, true), h, w, &deriv, false);
    gx.iter().zip(&gy).map(|(a, b)| (a * a + b * b).sqrt()).collect()
}

fn grad_error(gt: &AlphaMatte, pred: &AlphaMatte) -> f64 {
    let g = gradient_magnitude(gt);
    let p = gradient_magnitude(pred);
    g.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / g.len() as f64
}

pub fn video_matting_metrics(pred: &MatteSequence, gt: &MatteSequence) -> Result<VideoMattingMetrics> {
    if pred.frame_count() != gt.frame_count() || pred.dims() != gt.dims() {
        return Err(Error::shape(format!(
            "prediction is {}x{:?}, ground truth is {}x{:?}",
            pred.frame_count(),
            pred.dims(),
            gt.frame_count(),
            gt.dims()
        )));
    }
    let (p, g) = (pred.frames(), gt.frames());
    let per_frame: Vec<[f64; 4]> = (0..gt.frame_count())
        .into_par_iter()
        .map(|t| {
            let dt = if t == 0 {
                0.0
            } else {
                xi_dtssd(&g[t - 1], &g[t], &p[t - 1], &p[t])?
            };
            Ok([xi_mad(&g[t], &p[t])?, xi_mse(&g[t], &p[t])?, grad_error(&g[t], &p[t]), dt])
        })
        .collect::<Result<_>>()?;
    let n = per_frame.len() as f64;
    let mean = |i: usize| per_frame.iter().map(|f| f[i]).sum::<f64>() / n;
    Ok(VideoMattingMetrics {
        mad: mean(0) * 1e3,
        mse: mean(1) * 1e3,
        grad: mean(2) * 1e3,
        dtssd: mean(3) * 1e2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(seqs: Vec<MatteSequence>) -> InstanceSet {
        InstanceSet::from_sequences(seqs).unwrap()
    }

    #[test]
    fn merge_examples() {
        let a = MatteSequence::new("a", vec![AlphaMatte::from_fn(2, 2, |_, x| if x == 0 { 0.7 } else { 0.0 })]).unwrap();
        let b = MatteSequence::new("b", vec![AlphaMatte::from_fn(2, 2, |_, x| if x == 1 { 0.4 } else { 0.7 })]).unwrap();
        let merged = merge_instances(&set(vec![a.clone()])).unwrap();
        assert_eq!(merged.frames(), a.frames());
        let merged = merge_instances(&set(vec![a, b])).unwrap();
        // 0.7 + 0.7 clips to 1; 0.0 + 0.4 stays.
        assert_eq!(merged.frames()[0].values(), &[1.0, 0.4, 1.0, 0.4]);
    }

    /// Direct 2-D correlation with the outer-product kernels, as oracle for the
    /// separable path.
    fn gradient_oracle(m: &AlphaMatte) -> Vec<f64> {
        let (h, w) = m.dims();
        let (s, d) = gaussian_derivative_kernels(GRAD_SIGMA);
        let half = (s.len() / 2) as isize;
        let at = |y: isize, x: isize| m.get(y.clamp(0, h as isize - 1) as usize, x.clamp(0, w as isize - 1) as usize) as f64;
        let mut out = Vec::new();
        for y in 0..h as isize {
            for x in 0..w as isize {
                let (mut gx, mut gy) = (0.0, 0.0);
                for i in 0..s.len() {
                    for j in 0..s.len() {
                        let (dy, dx) = (i as isize - half, j as isize - half);
                        gx += s[i] * d[j] * at(y + dy, x + dx);
                        gy += d[i] * s[j] * at(y + dy, x + dx);
                    }
                }
                out.push((gx * gx + gy * gy).sqrt());
            }
        }
        out
    }

    #[test]
    fn kernels_have_unit_norm() {
        let (s, d) = gaussian_derivative_kernels(1.4);
        assert_eq!(s.len(), 9);
        let norm: f64 = s.iter().flat_map(|a| d.iter().map(move |b| (a * b) * (a * b))).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separable_gradient_matches_direct_convolution() {
        let m = AlphaMatte::from_fn(13, 17, |y, x| (((y * 7 + x * 3) % 11) as f32) / 10.0);
        let fast = gradient_magnitude(&m);
        let slow = gradient_oracle(&m);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
        // Flat images have no gradient under replicated borders.
        assert!(gradient_magnitude(&AlphaMatte::filled(6, 6, 0.4)).iter().all(|&g| g.abs() < 1e-15));
    }

    #[test]
    fn video_metric_examples() {
        let gt = MatteSequence::new(
            "g",
            (0..4).map(|t| AlphaMatte::from_fn(8, 8, |y, x| ((y * 8 + x + t) % 5) as f32 / 8.0)).collect(),
        )
        .unwrap();
        let same = video_matting_metrics(&gt, &gt).unwrap();
        assert_eq!(same, VideoMattingMetrics::default());

        let zeros = MatteSequence::new("z", vec![AlphaMatte::zeros(8, 8); 4]).unwrap();
        let tenth = MatteSequence::new("p", vec![AlphaMatte::filled(8, 8, 0.1); 4]).unwrap();
        let vm = video_matting_metrics(&tenth, &zeros).unwrap();
        assert!((vm.mad - 100.0).abs() < 1e-4);
        assert!((vm.mse - 10.0).abs() < 1e-4);
        assert_eq!(vm.dtssd, 0.0);
        assert!(vm.grad < 1e-20);

        let short = MatteSequence::new("s", vec![AlphaMatte::zeros(8, 8); 3]).unwrap();
        assert!(video_matting_metrics(&short, &zeros).is_err());
    }
}
