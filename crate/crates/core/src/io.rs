//! On-disk layout: one single-channel PNG per frame named by its zero-padded
//! 5-digit index, instances as sibling directories, one JSON manifest per clip.
//!
//! ```text
//! <root>/<clip>/manifest.json
//! <root>/<clip>/<instance>/00000.png
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matte::{AlphaMatte, BinaryMask, InstanceSet, MaskSequence, MatteSequence, RgbImage};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum BitDepth {
    Eight,
    #[default]
    Sixteen,
}

impl BitDepth {
    pub fn max_code(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }

    /// Largest round-trip error of a stored value.
    pub fn half_step(self) -> f64 {
        0.5 / self.max_code()
    }
}

pub fn frame_file_name(index: usize) -> String {
    format!("{index:05}.png")
}

fn parse_frame_index(name: &str) -> Option<usize> {
    let stem = name.strip_suffix(".png")?;
    if stem.len() != 5 || !stem.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    stem.parse().ok()
}

/// Frame files of `dir` ordered by index, checking the indices run 0..n.
fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut indexed = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if let Some(i) = entry.file_name().to_str().and_then(parse_frame_index) {
            indexed.push((i, entry.path()));
        }
    }
    indexed.sort();
    for (expected, (i, _)) in indexed.iter().enumerate() {
        if *i != expected {
            return Err(Error::MissingFrame {
                dir: dir.to_owned(),
                index: expected,
            });
        }
    }
    if indexed.is_empty() {
        return Err(Error::MissingFrame {
            dir: dir.to_owned(),
            index: 0,
        });
    }
    Ok(indexed.into_iter().map(|(_, p)| p).collect())
}

fn open_image(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|source| match source {
        image::ImageError::IoError(e) => Error::io(path, e),
        source => Error::Image {
            path: path.to_owned(),
            source,
        },
    })
}

/// Decodes a grayscale PNG into a unit-interval matte.
pub fn load_matte(path: &Path) -> Result<AlphaMatte> {
    let (w, h, values): (u32, u32, Vec<f32>) = match open_image(path)? {
        DynamicImage::ImageLuma8(img) => (
            img.width(),
            img.height(),
            img.into_raw().into_iter().map(|c| (c as f64 / 255.0) as f32).collect(),
        ),
        DynamicImage::ImageLuma16(img) => (
            img.width(),
            img.height(),
            img.into_raw().into_iter().map(|c| (c as f64 / 65535.0) as f32).collect(),
        ),
        other => {
            return Err(Error::BadEncoding {
                path: path.to_owned(),
                detail: format!("expected 8- or 16-bit grayscale, found {:?}", other.color()),
            })
        }
    };
    AlphaMatte::new(h as usize, w as usize, values)
}

fn quantize(v: f64, depth: BitDepth) -> u32 {
    (v.clamp(0.0, 1.0) * depth.max_code()).round() as u32
}

fn save_image(img: DynamicImage, path: &Path) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| match source {
            image::ImageError::IoError(e) => Error::io(path, e),
            source => Error::Image {
                path: path.to_owned(),
                source,
            },
        })
}

pub fn save_matte(matte: &AlphaMatte, path: &Path, depth: BitDepth) -> Result<()> {
    let (w, h) = (matte.width() as u32, matte.height() as u32);
    let img = match depth {
        BitDepth::Eight => DynamicImage::ImageLuma8(
            ImageBuffer::<Luma<u8>, _>::from_raw(
                w,
                h,
                matte.values().iter().map(|&v| quantize(v as f64, depth) as u8).collect(),
            )
            .expect("buffer length matches dimensions"),
        ),
        BitDepth::Sixteen => DynamicImage::ImageLuma16(
            ImageBuffer::<Luma<u16>, _>::from_raw(
                w,
                h,
                matte.values().iter().map(|&v| quantize(v as f64, depth) as u16).collect(),
            )
            .expect("buffer length matches dimensions"),
        ),
    };
    save_image(img, path)
}

fn dir_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Loads `dir/00000.png ..` as one sequence named after the directory. When
/// `expected_frames` is given a different frame count is a shape mismatch.
pub fn load_matte_sequence(dir: &Path, expected_frames: Option<usize>) -> Result<MatteSequence> {
    let paths = frame_paths(dir)?;
    if let Some(n) = expected_frames {
        if paths.len() != n {
            return Err(Error::shape(format!(
                "{} holds {} frames, expected {n}",
                dir.display(),
                paths.len()
            )));
        }
    }
    let frames = paths
        .par_iter()
        .map(|p| load_matte(p))
        .collect::<Result<Vec<_>>>()?;
    MatteSequence::new(dir_name(dir), frames)
}

pub fn save_matte_sequence(seq: &MatteSequence, dir: &Path, depth: BitDepth) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    seq.frames()
        .par_iter()
        .enumerate()
        .try_for_each(|(t, f)| save_matte(f, &dir.join(frame_file_name(t)), depth))
}

/// Masks are stored as 8-bit 0/255 images; any non-zero code reads back as set.
pub fn load_mask_sequence(dir: &Path) -> Result<MaskSequence> {
    let seq = load_matte_sequence(dir, None)?;
    MaskSequence::new(
        seq.frames()
            .iter()
            .map(|f| crate::metrics::binarize(f, 0.0))
            .collect(),
    )
}

pub fn save_mask_sequence(seq: &MaskSequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    seq.frames()
        .par_iter()
        .enumerate()
        .try_for_each(|(t, m)| save_mask(m, &dir.join(frame_file_name(t))))
}

pub fn save_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    let img = ImageBuffer::<Luma<u8>, _>::from_raw(
        mask.width() as u32,
        mask.height() as u32,
        mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }).collect(),
    )
    .expect("buffer length matches dimensions");
    save_image(DynamicImage::ImageLuma8(img), path)
}

/// Decodes an 8- or 16-bit RGB PNG.
pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let (w, h, data): (u32, u32, Vec<f64>) = match open_image(path)? {
        DynamicImage::ImageRgb8(img) => (
            img.width(),
            img.height(),
            img.into_raw().into_iter().map(|c| c as f64 / 255.0).collect(),
        ),
        DynamicImage::ImageRgb16(img) => (
            img.width(),
            img.height(),
            img.into_raw().into_iter().map(|c| c as f64 / 65535.0).collect(),
        ),
        other => {
            return Err(Error::BadEncoding {
                path: path.to_owned(),
                detail: format!("expected RGB, found {:?}", other.color()),
            })
        }
    };
    RgbImage::new(h as usize, w as usize, data)
}

/// Writes an 8-bit RGB PNG.
pub fn save_rgb(img: &RgbImage, path: &Path) -> Result<()> {
    let buf = ImageBuffer::<Rgb<u8>, _>::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.data().iter().map(|&c| quantize(c, BitDepth::Eight) as u8).collect(),
    )
    .expect("buffer length matches dimensions");
    save_image(DynamicImage::ImageRgb8(buf), path)
}

/// Paths of the RGB frames in `dir`, in index order.
pub fn rgb_frame_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    frame_paths(dir)
}

pub fn load_rgb_sequence(dir: &Path) -> Result<Vec<RgbImage>> {
    frame_paths(dir)?.par_iter().map(|p| load_rgb(p)).collect()
}

/// Per-clip JSON manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipManifest {
    pub clip_id: String,
    pub frame_count: usize,
    pub width: usize,
    pub height: usize,
    pub gt_instances: Vec<String>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

impl ClipManifest {
    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(self, path)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Gt,
    Pred,
}

/// A clip manifest together with the roots holding ground truth and predictions.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub clip: ClipManifest,
    pub gt_root: PathBuf,
    pub pred_root: PathBuf,
}

impl DatasetManifest {
    /// Reads `<gt_root>/<clip_id>/manifest.json`.
    pub fn open(gt_root: &Path, pred_root: &Path, clip_id: &str) -> Result<Self> {
        let clip = ClipManifest::read(&gt_root.join(clip_id).join(MANIFEST_FILE))?;
        if clip.clip_id != clip_id {
            return Err(Error::InvalidValue(format!(
                "manifest in `{clip_id}` names clip `{}`",
                clip.clip_id
            )));
        }
        Ok(Self {
            clip,
            gt_root: gt_root.to_owned(),
            pred_root: pred_root.to_owned(),
        })
    }

    pub fn clip_dir(&self, side: Side) -> PathBuf {
        match side {
            Side::Gt => self.gt_root.join(&self.clip.clip_id),
            Side::Pred => self.pred_root.join(&self.clip.clip_id),
        }
    }
}

/// Clip ids under `root`: every sub-directory holding a manifest, sorted.
pub fn list_clips(root: &Path) -> Result<Vec<String>> {
    let mut clips = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        if entry.path().join(MANIFEST_FILE).is_file() {
            clips.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    clips.sort();
    Ok(clips)
}

/// Ground truth is read from the instance list in the manifest; predictions
/// are every sub-directory of the prediction clip directory. A missing
/// prediction directory is an empty set.
pub fn load_instance_set(manifest: &DatasetManifest, side: Side) -> Result<InstanceSet> {
    let clip = &manifest.clip;
    let dir = manifest.clip_dir(side);
    let ids: Vec<String> = match side {
        Side::Gt => clip.gt_instances.clone(),
        Side::Pred => {
            if !dir.is_dir() {
                Vec::new()
            } else {
                let mut ids = Vec::new();
                for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                    let entry = entry.map_err(|e| Error::io(&dir, e))?;
                    if entry.path().is_dir() {
                        ids.push(entry.file_name().to_string_lossy().into_owned());
                    }
                }
                ids.sort();
                ids
            }
        }
    };
    let mut set = InstanceSet::empty(clip.frame_count, clip.height, clip.width);
    for id in ids {
        let seq = load_matte_sequence(&dir.join(&id), Some(clip.frame_count))?;
        set.insert(seq)?;
    }
    Ok(set)
}

/// Writes every sequence of `set` under `clip_dir/<instance>/`.
pub fn save_instance_set(set: &InstanceSet, clip_dir: &Path, depth: BitDepth) -> Result<()> {
    for seq in set.sequences() {
        save_matte_sequence(seq, &clip_dir.join(seq.instance_id()), depth)?;
    }
    Ok(())
}
