//! Multi-instance clip synthesis by iterative alpha compositing.
//!
//! Layers are composited back to front with the straight-alpha "over"
//! operator. The ground-truth alpha of each layer is attenuated by the
//! transparency of everything in front of it, so per pixel the instance
//! alphas sum to at most one and the frame satisfies
//! `I = Σ ᾱ_i F_i + (1 − Σ ᾱ_i) B` exactly.

mod generate;
mod source;
pub mod store;
mod warp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matte::{AlphaMatte, RgbImage};

pub use generate::{
    benchmark_mix, clip_seed, generate_clip, instance_id, generate_clip_streaming, ClipParams, CompositeResult, CompositeSpec, FrameRecord,
    LayerProvenance, PlacementConfig, Provenance,
};
pub use source::{BackgroundSource, DiskBackground, DiskForeground, ForegroundSource};
pub use warp::{fit_rgb, place_and_crop, warp_frame, warp_rgb, Affine};

/// One frame of a foreground asset: straight colour plus its alpha.
#[derive(Clone, Debug, PartialEq)]
pub struct ForegroundFrame {
    pub rgb: RgbImage,
    pub alpha: AlphaMatte,
}

impl ForegroundFrame {
    pub fn new(rgb: RgbImage, alpha: AlphaMatte) -> Result<Self> {
        if rgb.dims() != alpha.dims() {
            return Err(Error::shape(format!(
                "foreground colour {:?} vs alpha {:?}",
                rgb.dims(),
                alpha.dims()
            )));
        }
        Ok(Self { rgb, alpha })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForegroundClip {
    pub instance_id: String,
    pub frames: Vec<ForegroundFrame>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundClip {
    pub frames: Vec<RgbImage>,
}

/// Output of [`composite_frame`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompositedFrame {
    pub rgb: RgbImage,
    /// Occlusion-attenuated alphas, in the input layer order.
    pub alphas: Vec<AlphaMatte>,
}

fn check_layers(bg: &RgbImage, layers: &[(&RgbImage, &AlphaMatte)]) -> Result<()> {
    let dims = bg.dims();
    for (k, (rgb, alpha)) in layers.iter().enumerate() {
        if rgb.dims() != dims || alpha.dims() != dims {
            return Err(Error::shape(format!(
                "layer {k} is {:?}/{:?}, background is {dims:?}",
                rgb.dims(),
                alpha.dims()
            )));
        }
    }
    Ok(())
}

/// Attenuated alphas of one pixel, rounded to storage precision with the
/// partition `Σ ᾱ ≤ 1` preserved. `alphas` are ordered back to front.
fn attenuate_pixel(alphas: &[f32], out: &mut [f32]) {
    let mut transmit = 1.0f64;
    for k in (0..alphas.len()).rev() {
        let a = alphas[k] as f64;
        out[k] = (a * transmit) as f32;
        transmit *= 1.0 - a;
    }
    // Rounding each product to f32 may overshoot one by a few ulps.
    loop {
        let sum: f64 = out.iter().map(|&v| v as f64).sum();
        if sum <= 1.0 {
            break;
        }
        let k = (0..out.len())
            .max_by(|&i, &j| out[i].total_cmp(&out[j]).then(j.cmp(&i)))
            .expect("overshoot implies at least one layer");
        out[k] = f32::from_bits(out[k].to_bits() - 1);
    }
}

/// Blends one channel value: `Σ ᾱ_k f_k + (1 − Σ ᾱ_k) b`, summing in layer order.
#[inline]
fn blend_channel(alphas: &[f32], colours: impl Iterator<Item = f64>, alpha_sum: f64, bg: f64) -> f64 {
    let mut acc = 0.0;
    for (&a, f) in alphas.iter().zip(colours) {
        acc += a as f64 * f;
    }
    acc + (1.0 - alpha_sum) * bg
}

/// Composites `layers` (back to front) over `bg`.
pub fn composite_frame(bg: &RgbImage, layers: &[(&RgbImage, &AlphaMatte)]) -> Result<CompositedFrame> {
    check_layers(bg, layers)?;
    let (h, w) = bg.dims();
    let n = layers.len();
    let mut alphas = vec![Vec::with_capacity(h * w); n];
    let mut rgb = Vec::with_capacity(h * w * 3);
    let mut src = vec![0.0f32; n];
    let mut adj = vec![0.0f32; n];
    for i in 0..h * w {
        for (k, (_, a)) in layers.iter().enumerate() {
            src[k] = a.values()[i];
        }
        attenuate_pixel(&src, &mut adj);
        let alpha_sum: f64 = adj.iter().map(|&v| v as f64).sum();
        for ch in 0..3 {
            let colours = layers.iter().map(|(f, _)| f.data()[i * 3 + ch]);
            let v = blend_channel(&adj, colours, alpha_sum, bg.data()[i * 3 + ch]);
            rgb.push(v.clamp(0.0, 1.0));
        }
        for (k, v) in adj.iter().enumerate() {
            alphas[k].push(*v);
        }
    }
    Ok(CompositedFrame {
        rgb: RgbImage::from_raw(h, w, rgb),
        alphas: alphas.into_iter().map(|a| AlphaMatte::from_raw(h, w, a)).collect(),
    })
}

/// Mean over pixels and channels of `|Σ ᾱ_i F_i + (1 − Σ ᾱ_i) B − I|`.
pub fn composition_residual(
    frame: &RgbImage,
    layers: &[(&RgbImage, &AlphaMatte)],
    bg: &RgbImage,
) -> Result<f64> {
    check_layers(bg, layers)?;
    if frame.dims() != bg.dims() {
        return Err(Error::shape(format!(
            "frame {:?} vs background {:?}",
            frame.dims(),
            bg.dims()
        )));
    }
    let (h, w) = bg.dims();
    let mut adj = vec![0.0f32; layers.len()];
    let mut total = 0.0f64;
    for i in 0..h * w {
        for (k, (_, a)) in layers.iter().enumerate() {
            adj[k] = a.values()[i];
        }
        let alpha_sum: f64 = adj.iter().map(|&v| v as f64).sum();
        for ch in 0..3 {
            let colours = layers.iter().map(|(f, _)| f.data()[i * 3 + ch]);
            let model = blend_channel(&adj, colours, alpha_sum, bg.data()[i * 3 + ch]);
            total += (model - frame.data()[i * 3 + ch]).abs();
        }
    }
    Ok(total / (h * w * 3) as f64)
}

/// Serializable summary of a residual check.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub per_frame: Vec<f64>,
    pub max: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb(v: [f64; 3]) -> RgbImage {
        RgbImage::filled(3, 3, v)
    }

    #[test]
    fn opaque_and_transparent_single_layers() {
        let bg = rgb([0.1, 0.2, 0.3]);
        let fg = rgb([0.9, 0.8, 0.7]);
        let out = composite_frame(&bg, &[(&fg, &AlphaMatte::filled(3, 3, 1.0))]).unwrap();
        assert_eq!(out.rgb, fg);
        assert!(out.alphas[0].values().iter().all(|&v| v == 1.0));
        let out = composite_frame(&bg, &[(&fg, &AlphaMatte::zeros(3, 3))]).unwrap();
        assert_eq!(out.rgb, bg);
        assert!(out.alphas[0].values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn front_layer_attenuates_back_layer() {
        let bg = rgb([0.0; 3]);
        let back = rgb([1.0, 0.0, 0.0]);
        let front = rgb([0.0, 1.0, 0.0]);
        let out = composite_frame(
            &bg,
            &[(&back, &AlphaMatte::filled(3, 3, 1.0)), (&front, &AlphaMatte::filled(3, 3, 0.5))],
        )
        .unwrap();
        // ᾱ_back = 1.0 · (1 − 0.5).
        assert_eq!(out.alphas[0].get(1, 1), 0.5);
        assert_eq!(out.alphas[1].get(1, 1), 0.5);
        assert_eq!(out.rgb.pixel(1, 1), [0.5, 0.5, 0.0]);
    }

    /// Reference "over" iteration in double precision: C ← α F + (1 − α) C.
    fn over_oracle(bg: &RgbImage, layers: &[(&RgbImage, &AlphaMatte)]) -> Vec<f64> {
        let mut c = bg.data().to_vec();
        for (f, a) in layers {
            for i in 0..a.len() {
                let alpha = a.values()[i] as f64;
                for ch in 0..3 {
                    c[i * 3 + ch] = alpha * f.data()[i * 3 + ch] + (1.0 - alpha) * c[i * 3 + ch];
                }
            }
        }
        c
    }

    #[test]
    fn closed_form_matches_over_iteration_and_reconstructs_exactly() {
        let (h, w) = (7, 9);
        let bg = RgbImage::from_fn(h, w, |y, x| [y as f64 / 7.0, x as f64 / 9.0, 0.3]);
        let colours: Vec<RgbImage> = (0..3)
            .map(|k| RgbImage::from_fn(h, w, |y, x| [((y + k) % 3) as f64 / 2.0, 0.7, ((x * k) % 5) as f64 / 4.0]))
            .collect();
        let mattes: Vec<AlphaMatte> = (0..3)
            .map(|k| AlphaMatte::from_fn(h, w, |y, x| (((y * 3 + x + 2 * k) % 7) as f32 / 6.0).powf(0.7)))
            .collect();
        let layers: Vec<_> = colours.iter().zip(&mattes).collect();
        let out = composite_frame(&bg, &layers).unwrap();
        for (got, want) in out.rgb.data().iter().zip(over_oracle(&bg, &layers)) {
            assert!((got - want).abs() < 1e-6);
        }
        for i in 0..h * w {
            let sum: f64 = out.alphas.iter().map(|a| a.values()[i] as f64).sum();
            assert!(sum <= 1.0);
        }
        let adjusted: Vec<_> = colours.iter().zip(&out.alphas).collect();
        assert!(composition_residual(&out.rgb, &adjusted, &bg).unwrap() <= 1e-12);
    }

    #[test]
    fn swapping_layers_only_changes_overlap() {
        let bg = rgb([0.5; 3]);
        let f = rgb([1.0; 3]);
        let a = AlphaMatte::from_fn(3, 3, |_, x| if x < 2 { 0.8 } else { 0.0 });
        let b = AlphaMatte::from_fn(3, 3, |_, x| if x > 0 { 0.6 } else { 0.0 });
        let ab = composite_frame(&bg, &[(&f, &a), (&f, &b)]).unwrap();
        let ba = composite_frame(&bg, &[(&f, &b), (&f, &a)]).unwrap();
        for y in 0..3 {
            for x in 0..3 {
                let same = ab.alphas[0].get(y, x) == ba.alphas[1].get(y, x);
                assert_eq!(same, x != 1, "pixel ({y},{x})");
            }
        }
    }

    #[test]
    fn residual_examples() {
        let bg = rgb([0.2, 0.2, 0.2]);
        assert_eq!(composition_residual(&bg, &[], &bg).unwrap(), 0.0);
        // One opaque layer over 3 of 9 pixels, frame left equal to the background.
        let fg = rgb([0.8, 0.5, 0.2]);
        let a = AlphaMatte::from_fn(3, 3, |y, _| if y == 0 { 1.0 } else { 0.0 });
        let r = composition_residual(&bg, &[(&fg, &a)], &bg).unwrap();
        let expected = (0.6 + 0.3 + 0.0) / 3.0 * 3.0 / 9.0;
        assert!((r - expected).abs() < 1e-12);
        assert!(composite_frame(&bg, &[(&fg, &AlphaMatte::zeros(2, 2))]).is_err());
    }

    #[test]
    fn partition_survives_rounding() {
        let mut out = [0.0f32; 3];
        for a in [0.999_999_9f32, 0.3, 0.7, 1.0, 0.123_456_7] {
            for b in [0.999_999_9f32, 0.5, 0.1, 1.0] {
                attenuate_pixel(&[a, b, 0.333_333_3], &mut out);
                assert!(out.iter().map(|&v| v as f64).sum::<f64>() <= 1.0);
            }
        }
    }
}
