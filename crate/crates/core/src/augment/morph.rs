//! Binary morphology with a disc structuring element `{dx² + dy² ≤ r²}`.
//!
//! Each row of the disc is a horizontal span, so a row prefix sum answers
//! "any set" (dilation) or "all set" (erosion) per span in O(1). Pixels
//! outside the frame count as unset.

use crate::matte::BinaryMask;

fn half_widths(radius: usize) -> Vec<usize> {
    let r2 = (radius * radius) as i64;
    (0..=2 * radius)
        .map(|k| {
            let dy = k as i64 - radius as i64;
            ((r2 - dy * dy) as f64).sqrt().floor() as usize
        })
        .collect()
}

fn row_prefix(mask: &BinaryMask) -> Vec<u32> {
    let (h, w) = mask.dims();
    let mut prefix = vec![0u32; h * (w + 1)];
    for y in 0..h {
        let row = &mask.bits()[y * w..(y + 1) * w];
        let out = &mut prefix[y * (w + 1)..(y + 1) * (w + 1)];
        for x in 0..w {
            out[x + 1] = out[x] + row[x] as u32;
        }
    }
    prefix
}

fn apply(mask: &BinaryMask, radius: usize, erode: bool) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (h, w) = mask.dims();
    let prefix = row_prefix(mask);
    let spans = half_widths(radius);
    BinaryMask::from_fn(h, w, |y, x| {
        for (k, &hw) in spans.iter().enumerate() {
            let yy = y as i64 + k as i64 - radius as i64;
            let full = 2 * hw + 1;
            if yy < 0 || yy >= h as i64 {
                if erode {
                    return false;
                }
                continue;
            }
            let lo = x.saturating_sub(hw);
            let hi = (x + hw + 1).min(w);
            let base = yy as usize * (w + 1);
            let count = (prefix[base + hi] - prefix[base + lo]) as usize;
            if erode && count < full {
                return false;
            }
            if !erode && count > 0 {
                return true;
            }
        }
        erode
    })
}

pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    apply(mask, radius, false)
}

pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    apply(mask, radius, true)
}
