//! Affine placement of foreground clips with bilinear resampling.

use serde::{Deserialize, Serialize};

use super::{ForegroundClip, ForegroundFrame};
use crate::error::{Error, Result};
use crate::matte::{AlphaMatte, RgbImage};

/// Maps source coordinates to output coordinates:
/// `out = [[a, b], [c, d]] · src + [tx, ty]`, with `(x, y)` measured in
/// pixels from the top-left corner of the image (pixel centres at `+0.5`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
        tx: 0.0,
        ty: 0.0,
    };

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self { tx, ty, ..Self::IDENTITY }
    }

    /// Uniform scale about the origin followed by a translation.
    pub fn scale_translate(scale: f64, tx: f64, ty: f64) -> Self {
        Self {
            a: scale,
            d: scale,
            tx,
            ty,
            ..Self::IDENTITY
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    fn inverse(&self) -> Result<Affine> {
        let det = self.det();
        if !det.is_finite() || det.abs() < 1e-12 {
            return Err(Error::BadTransform { det });
        }
        let (a, b, c, d) = (self.d / det, -self.b / det, -self.c / det, self.a / det);
        Ok(Affine {
            a,
            b,
            c,
            d,
            tx: -(a * self.tx + b * self.ty),
            ty: -(c * self.tx + d * self.ty),
        })
    }

    fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a * x + self.b * y + self.tx,
            self.c * x + self.d * y + self.ty,
        )
    }
}

/// Bilinear sample position inside the source footprint, or `None` outside it.
struct Sample {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
    fx: f64,
    fy: f64,
}

fn locate(inv: &Affine, x: usize, y: usize, src_h: usize, src_w: usize) -> Option<Sample> {
    let (qx, qy) = inv.apply(x as f64 + 0.5, y as f64 + 0.5);
    if !(qx >= 0.0 && qx < src_w as f64 && qy >= 0.0 && qy < src_h as f64) {
        return None;
    }
    let sx = (qx - 0.5).clamp(0.0, (src_w - 1) as f64);
    let sy = (qy - 0.5).clamp(0.0, (src_h - 1) as f64);
    let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
    Some(Sample {
        x0,
        y0,
        x1: (x0 + 1).min(src_w - 1),
        y1: (y0 + 1).min(src_h - 1),
        fx: sx - x0 as f64,
        fy: sy - y0 as f64,
    })
}

impl Sample {
    fn blend(&self, at: impl Fn(usize, usize) -> f64) -> f64 {
        let top = at(self.y0, self.x0) * (1.0 - self.fx) + at(self.y0, self.x1) * self.fx;
        let bottom = at(self.y1, self.x0) * (1.0 - self.fx) + at(self.y1, self.x1) * self.fx;
        top * (1.0 - self.fy) + bottom * self.fy
    }
}

/// Resamples colour and alpha with the same transform onto an
/// `out_h × out_w` canvas; everything outside the source footprint gets
/// alpha 0 and black colour.
pub fn warp_frame(frame: &ForegroundFrame, transform: &Affine, out_h: usize, out_w: usize) -> Result<ForegroundFrame> {
    let inv = transform.inverse()?;
    let (src_h, src_w) = frame.alpha.dims();
    let mut rgb = Vec::with_capacity(out_h * out_w * 3);
    let mut alpha = Vec::with_capacity(out_h * out_w);
    let data = frame.rgb.data();
    for y in 0..out_h {
        for x in 0..out_w {
            match locate(&inv, x, y, src_h, src_w) {
                Some(s) => {
                    for ch in 0..3 {
                        rgb.push(s.blend(|r, c| data[(r * src_w + c) * 3 + ch]).clamp(0.0, 1.0));
                    }
                    alpha.push(s.blend(|r, c| frame.alpha.get(r, c) as f64).clamp(0.0, 1.0) as f32);
                }
                None => {
                    rgb.extend([0.0; 3]);
                    alpha.push(0.0);
                }
            }
        }
    }
    Ok(ForegroundFrame {
        rgb: RgbImage::from_raw(out_h, out_w, rgb),
        alpha: AlphaMatte::from_raw(out_h, out_w, alpha),
    })
}

/// Resamples a whole RGB image (used to fit backgrounds to the output size).
pub fn warp_rgb(img: &RgbImage, transform: &Affine, out_h: usize, out_w: usize) -> Result<RgbImage> {
    let inv = transform.inverse()?;
    let (src_h, src_w) = img.dims();
    let data = img.data();
    let mut out = Vec::with_capacity(out_h * out_w * 3);
    for y in 0..out_h {
        for x in 0..out_w {
            match locate(&inv, x, y, src_h, src_w) {
                Some(s) => {
                    for ch in 0..3 {
                        out.push(s.blend(|r, c| data[(r * src_w + c) * 3 + ch]).clamp(0.0, 1.0));
                    }
                }
                None => out.extend([0.0; 3]),
            }
        }
    }
    Ok(RgbImage::from_raw(out_h, out_w, out))
}

/// Stretches `img` to exactly `out_h × out_w`.
pub fn fit_rgb(img: &RgbImage, out_h: usize, out_w: usize) -> RgbImage {
    if img.dims() == (out_h, out_w) {
        return img.clone();
    }
    let t = Affine {
        a: out_w as f64 / img.width() as f64,
        d: out_h as f64 / img.height() as f64,
        ..Affine::IDENTITY
    };
    warp_rgb(img, &t, out_h, out_w).expect("positive scale factors are invertible")
}

/// Applies one transform to every frame of a clip.
pub fn place_and_crop(clip: &ForegroundClip, transform: &Affine, out_size: (usize, usize)) -> Result<ForegroundClip> {
    let (out_h, out_w) = out_size;
    if out_h == 0 || out_w == 0 {
        return Err(Error::InvalidValue(format!(
            "output size must be positive, got {out_h}x{out_w}"
        )));
    }
    let frames = clip
        .frames
        .iter()
        .map(|f| warp_frame(f, transform, out_h, out_w))
        .collect::<Result<_>>()?;
    Ok(ForegroundClip {
        instance_id: clip.instance_id.clone(),
        frames,
    })
}
