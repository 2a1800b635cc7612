//! Perturbations of binary mask guidance.
//!
//! Every operation draws from a ChaCha stream keyed by the seed, an
//! operation tag and the frame index, so frames are processed in parallel and
//! the output does not depend on the thread count.

mod morph;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matte::{BinaryMask, MaskSequence};

pub use morph::{dilate, erode};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EraseConfig {
    pub probability: f64,
    /// Largest erased area as a fraction of the mask bounding box.
    pub max_fraction: f64,
}

impl Default for EraseConfig {
    fn default() -> Self {
        Self { probability: 0.3, max_fraction: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PasteConfig {
    pub probability: f64,
    /// Square region side as a fraction of `min(H, W)`.
    pub region_range: (f64, f64),
}

impl Default for PasteConfig {
    fn default() -> Self {
        Self { probability: 0.3, region_range: (0.1, 0.3) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MergeConfig {
    pub probability: f64,
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self { probability: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MorphConfig {
    pub probability: f64,
    pub max_radius: usize,
}

impl Default for MorphConfig {
    fn default() -> Self {
        Self { probability: 0.5, max_radius: 15 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TmgConfig {
    pub probability: f64,
}

impl Default for TmgConfig {
    fn default() -> Self {
        Self { probability: 0.2 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub erase: EraseConfig,
    pub paste: PasteConfig,
    pub merge: MergeConfig,
    pub morph: MorphConfig,
    pub tmg: TmgConfig,
    pub seed: u64,
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} probability {p} outside [0, 1]")))
    }
}

fn check_fraction(name: &str, f: f64) -> Result<()> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} fraction {f} outside (0, 1]")))
    }
}

impl AugmentConfig {
    /// Every probability off.
    pub fn disabled(seed: u64) -> Self {
        let mut cfg = Self { seed, ..Self::default() };
        cfg.erase.probability = 0.0;
        cfg.paste.probability = 0.0;
        cfg.merge.probability = 0.0;
        cfg.morph.probability = 0.0;
        cfg.tmg.probability = 0.0;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("erase", self.erase.probability)?;
        check_probability("paste", self.paste.probability)?;
        check_probability("merge", self.merge.probability)?;
        check_probability("morph", self.morph.probability)?;
        check_probability("tmg", self.tmg.probability)?;
        check_fraction("erase", self.erase.max_fraction)?;
        let (lo, hi) = self.paste.region_range;
        check_fraction("paste", lo)?;
        check_fraction("paste", hi)?;
        if lo > hi {
            return Err(Error::InvalidConfig(format!("paste range ({lo}, {hi}) is reversed")));
        }
        Ok(())
    }
}

/// Target mask and the union of every other instance.
#[derive(Clone, Debug, PartialEq)]
pub struct GuidancePair {
    pub target: MaskSequence,
    pub reference: MaskSequence,
}

impl GuidancePair {
    pub fn new(target: MaskSequence, reference: MaskSequence) -> Result<Self> {
        if target.frame_count() != reference.frame_count() || target.dims() != reference.dims() {
            return Err(Error::shape("target and reference sequences differ in shape"));
        }
        Ok(Self { target, reference })
    }
}

pub fn make_guidance(masks: &BTreeMap<String, MaskSequence>, target_id: &str) -> Result<GuidancePair> {
    let target = masks
        .get(target_id)
        .ok_or_else(|| Error::UnknownInstance(target_id.to_owned()))?
        .clone();
    let (h, w) = target.dims();
    let mut reference = MaskSequence::empty(target.frame_count(), h, w);
    for (id, seq) in masks {
        if id == target_id {
            continue;
        }
        if seq.frame_count() != target.frame_count() || seq.dims() != (h, w) {
            return Err(Error::shape(format!("mask sequence `{id}` differs from `{target_id}`")));
        }
        for (r, m) in reference.frames_mut().iter_mut().zip(seq.frames()) {
            r.union_with(m)?;
        }
    }
    Ok(GuidancePair { target, reference })
}

#[derive(Clone, Copy)]
#[repr(u64)]
enum Op {
    Morph = 1,
    Erase = 2,
    Paste = 3,
    Merge = 4,
    Tmg = 5,
    SaltPepper = 6,
}

fn frame_rng(seed: u64, op: Op, frame: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((op as u64) << 40) | frame as u64);
    rng
}

fn map_frames(
    seq: &MaskSequence,
    seed: u64,
    op: Op,
    f: impl Fn(usize, &BinaryMask, &mut ChaCha8Rng) -> BinaryMask + Sync,
) -> MaskSequence {
    let frames: Vec<BinaryMask> = seq
        .frames()
        .par_iter()
        .enumerate()
        .map(|(t, m)| f(t, m, &mut frame_rng(seed, op, t)))
        .collect();
    MaskSequence::new(frames).expect("augmentations preserve shape")
}

/// With probability `cfg.probability` per frame, erodes or dilates (fair
/// coin) with a disc of radius drawn from `1..=max_radius`.
pub fn morph_perturb(seq: &MaskSequence, cfg: &MorphConfig, seed: u64) -> MaskSequence {
    if cfg.max_radius == 0 || cfg.probability == 0.0 {
        return seq.clone();
    }
    map_frames(seq, seed, Op::Morph, |_, m, rng| {
        if !rng.random_bool(cfg.probability) {
            return m.clone();
        }
        let grow = rng.random_bool(0.5);
        let radius = rng.random_range(1..=cfg.max_radius);
        if grow {
            dilate(m, radius)
        } else {
            erode(m, radius)
        }
    })
}

/// Axis-aligned rectangle `[y0, y1) × [x0, x1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub y0: usize,
    pub x0: usize,
    pub y1: usize,
    pub x1: usize,
}

impl Rect {
    pub fn area(&self) -> usize {
        (self.y1 - self.y0) * (self.x1 - self.x0)
    }
}

pub fn erase_rect(mask: &BinaryMask, rect: Rect) -> BinaryMask {
    let mut out = mask.clone();
    for y in rect.y0..rect.y1.min(mask.height()) {
        for x in rect.x0..rect.x1.min(mask.width()) {
            out.set(y, x, false);
        }
    }
    out
}

/// Inside the bounding box `[lo, hi]` (inclusive), a random span whose
/// length is at most `scale` times the box side.
fn draw_span(rng: &mut ChaCha8Rng, lo: usize, hi: usize, scale: f64) -> (usize, usize) {
    let side = hi - lo + 1;
    let max_len = ((scale * side as f64).floor() as usize).max(1);
    let len = rng.random_range(1..=max_len);
    let start = rng.random_range(lo..=hi + 1 - len);
    (start, start + len)
}

/// Erases one random rectangle inside the mask bounding box on each selected
/// frame. The rectangle area is at most `max_fraction` of the box area.
pub fn mask_erase(seq: &MaskSequence, cfg: &EraseConfig, seed: u64) -> MaskSequence {
    if cfg.probability == 0.0 {
        return seq.clone();
    }
    let side_scale = cfg.max_fraction.sqrt();
    map_frames(seq, seed, Op::Erase, |_, m, rng| {
        if !rng.random_bool(cfg.probability) {
            return m.clone();
        }
        let Some((y0, x0, y1, x1)) = m.bounding_box() else {
            return m.clone();
        };
        let (ry0, ry1) = draw_span(rng, y0, y1, side_scale);
        let (rx0, rx1) = draw_span(rng, x0, x1, side_scale);
        erase_rect(m, Rect { y0: ry0, x0: rx0, y1: ry1, x1: rx1 })
    })
}

/// ORs the bits of `src` into the same-sized rectangle starting at `dst`.
pub fn paste_rect(mask: &BinaryMask, src: Rect, dst: (usize, usize)) -> BinaryMask {
    let mut out = mask.clone();
    let (h, w) = mask.dims();
    for y in src.y0..src.y1.min(h) {
        for x in src.x0..src.x1.min(w) {
            let (ty, tx) = (dst.0 + y - src.y0, dst.1 + x - src.x0);
            if mask.get(y, x) && ty < h && tx < w {
                out.set(ty, tx, true);
            }
        }
    }
    out
}

/// Copies a square region around a random set pixel onto a random location.
pub fn mask_paste(seq: &MaskSequence, cfg: &PasteConfig, seed: u64) -> MaskSequence {
    if cfg.probability == 0.0 {
        return seq.clone();
    }
    map_frames(seq, seed, Op::Paste, |_, m, rng| {
        if !rng.random_bool(cfg.probability) {
            return m.clone();
        }
        let ones = m.count_ones();
        if ones == 0 {
            return m.clone();
        }
        let (h, w) = m.dims();
        let frac = if cfg.region_range.0 == cfg.region_range.1 {
            cfg.region_range.0
        } else {
            rng.random_range(cfg.region_range.0..cfg.region_range.1)
        };
        let side = ((frac * h.min(w) as f64).round() as usize).clamp(1, h.min(w));
        let pick = rng.random_range(0..ones);
        let centre = m
            .bits()
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .nth(pick)
            .map(|(i, _)| i)
            .expect("pick < count of set bits");
        let (cy, cx) = (centre / w, centre % w);
        let y0 = cy.saturating_sub(side / 2).min(h - side);
        let x0 = cx.saturating_sub(side / 2).min(w - side);
        let dst = (rng.random_range(0..=h - side), rng.random_range(0..=w - side));
        paste_rect(m, Rect { y0, x0, y1: y0 + side, x1: x0 + side }, dst)
    })
}

/// On each selected frame, target and reference both become their union.
pub fn mask_merge(pair: &GuidancePair, cfg: &MergeConfig, seed: u64) -> GuidancePair {
    if cfg.probability == 0.0 {
        return pair.clone();
    }
    let merged: Vec<(BinaryMask, BinaryMask)> = pair
        .target
        .frames()
        .par_iter()
        .zip(pair.reference.frames())
        .enumerate()
        .map(|(t, (tar, reference))| {
            if frame_rng(seed, Op::Merge, t).random_bool(cfg.probability) {
                let mut u = tar.clone();
                u.union_with(reference).expect("pair frames share a shape");
                (u.clone(), u)
            } else {
                (tar.clone(), reference.clone())
            }
        })
        .collect();
    let (target, reference): (Vec<_>, Vec<_>) = merged.into_iter().unzip();
    GuidancePair {
        target: MaskSequence::new(target).expect("shape preserved"),
        reference: MaskSequence::new(reference).expect("shape preserved"),
    }
}

/// On each selected frame `t`, ORs in the original mask of a uniformly drawn frame.
pub fn temporal_mask_merge(seq: &MaskSequence, cfg: &TmgConfig, seed: u64) -> MaskSequence {
    if cfg.probability == 0.0 {
        return seq.clone();
    }
    let n = seq.frame_count();
    map_frames(seq, seed, Op::Tmg, |_, m, rng| {
        if !rng.random_bool(cfg.probability) {
            return m.clone();
        }
        let i = rng.random_range(0..n);
        let mut out = m.clone();
        out.union_with(&seq.frames()[i]).expect("frames share a shape");
        out
    })
}

/// Flips exactly `⌊fraction · H · W⌋` distinct pixels per frame.
///
/// The flipped positions are a prefix of a per-frame random permutation, so
/// for a fixed seed a larger fraction flips a superset of pixels.
pub fn salt_pepper(seq: &MaskSequence, fraction: f64, seed: u64) -> Result<MaskSequence> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidValue(format!("salt-and-pepper fraction {fraction} outside [0, 1]")));
    }
    let (h, w) = seq.dims();
    let n = h * w;
    let flips = ((fraction * n as f64).floor() as usize).min(n);
    if flips == 0 {
        return Ok(seq.clone());
    }
    Ok(map_frames(seq, seed, Op::SaltPepper, |_, m, rng| {
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut out = m.clone();
        let bits = out.bits_mut();
        for k in 0..flips {
            let j = rng.random_range(k..n);
            order.swap(k, j);
            let p = order[k] as usize;
            bits[p] = !bits[p];
        }
        out
    }))
}

/// Applies morphology, erase, paste and temporal merge in that order.
pub fn augment_sequence(seq: &MaskSequence, cfg: &AugmentConfig) -> Result<MaskSequence> {
    cfg.validate()?;
    let s = morph_perturb(seq, &cfg.morph, cfg.seed);
    let s = mask_erase(&s, &cfg.erase, cfg.seed);
    let s = mask_paste(&s, &cfg.paste, cfg.seed);
    Ok(temporal_mask_merge(&s, &cfg.tmg, cfg.seed))
}
