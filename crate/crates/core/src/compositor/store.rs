//! On-disk clip layout and residual validation.
//!
//! ```text
//! <clip>/manifest.json
//! <clip>/provenance.json
//! <clip>/<instance>/NNNNN.png            16-bit attenuated ground truth
//! <clip>/comp/image/NNNNN.png            composited frame
//! <clip>/comp/background/NNNNN.png
//! <clip>/comp/foreground/<instance>/NNNNN.png
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{CompositeResult, FrameRecord, Provenance};
use super::composition_residual;
use crate::error::{Error, Result};
use crate::io::{frame_file_name, load_matte, load_rgb, read_json, save_matte, save_rgb, write_json, BitDepth, ClipManifest, MANIFEST_FILE};
use crate::matte::{AlphaMatte, RgbImage};

pub const PROVENANCE_FILE: &str = "provenance.json";

/// Default validation tolerance: two 8-bit quantisation steps.
pub const DEFAULT_TOLERANCE: f64 = 2.0 / 255.0;

fn image_dir(clip: &Path) -> PathBuf {
    clip.join("comp").join("image")
}

fn background_dir(clip: &Path) -> PathBuf {
    clip.join("comp").join("background")
}

fn foreground_dir(clip: &Path, id: &str) -> PathBuf {
    clip.join("comp").join("foreground").join(id)
}

fn mkdir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes a clip one frame at a time.
#[derive(Debug)]
pub struct ClipWriter {
    dir: PathBuf,
    clip_id: String,
    ids: Vec<String>,
    frames: usize,
    dims: Option<(usize, usize)>,
}

impl ClipWriter {
    /// Prepares `<out_root>/<clip_id>/` for the given instance ids (back to front).
    pub fn create(out_root: &Path, clip_id: &str, ids: Vec<String>) -> Result<Self> {
        let dir = out_root.join(clip_id);
        mkdir(&image_dir(&dir))?;
        mkdir(&background_dir(&dir))?;
        for id in &ids {
            mkdir(&dir.join(id))?;
            mkdir(&foreground_dir(&dir, id))?;
        }
        Ok(Self {
            dir,
            clip_id: clip_id.to_owned(),
            ids,
            frames: 0,
            dims: None,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_record(&mut self, rec: &FrameRecord) -> Result<()> {
        let colours: Vec<&RgbImage> = rec.layers.iter().map(|l| &l.rgb).collect();
        self.write_frame(&rec.composite.rgb, &rec.background, &colours, &rec.composite.alphas)
    }

    /// Writes the next frame; layers are in the order given to [`ClipWriter::create`].
    pub fn write_frame(
        &mut self,
        image: &RgbImage,
        background: &RgbImage,
        colours: &[&RgbImage],
        alphas: &[AlphaMatte],
    ) -> Result<()> {
        if colours.len() != self.ids.len() || alphas.len() != self.ids.len() {
            return Err(Error::shape(format!(
                "frame has {}/{} layers, clip has {}",
                colours.len(),
                alphas.len(),
                self.ids.len()
            )));
        }
        match self.dims {
            None => self.dims = Some(image.dims()),
            Some(d) if d != image.dims() => {
                return Err(Error::shape(format!("frame {:?} in a {d:?} clip", image.dims())))
            }
            Some(_) => {}
        }
        let name = frame_file_name(self.frames);
        save_rgb(image, &image_dir(&self.dir).join(&name))?;
        save_rgb(background, &background_dir(&self.dir).join(&name))?;
        self.ids
            .par_iter()
            .zip(colours.par_iter().zip(alphas))
            .try_for_each(|(id, (rgb, alpha))| {
                save_rgb(rgb, &foreground_dir(&self.dir, id).join(&name))?;
                save_matte(alpha, &self.dir.join(id).join(&name), BitDepth::Sixteen)
            })?;
        self.frames += 1;
        Ok(())
    }

    /// Writes the manifest and provenance record.
    pub fn finish(self, provenance: &Provenance) -> Result<ClipManifest> {
        let (height, width) = self.dims.unwrap_or((provenance.height, provenance.width));
        let manifest = ClipManifest {
            clip_id: self.clip_id,
            frame_count: self.frames,
            width,
            height,
            gt_instances: self.ids,
        };
        manifest.write(&self.dir.join(MANIFEST_FILE))?;
        write_json(provenance, &self.dir.join(PROVENANCE_FILE))?;
        Ok(manifest)
    }
}

/// Stores an in-memory result under `<out_root>/<clip_id>/`.
pub fn write_clip(result: &CompositeResult, out_root: &Path, clip_id: &str) -> Result<ClipManifest> {
    let ids = result.provenance.instance_ids();
    let mut writer = ClipWriter::create(out_root, clip_id, ids.clone())?;
    for t in 0..result.frames.len() {
        let colours: Vec<&RgbImage> = result.foreground_rgb.iter().map(|c| &c[t]).collect();
        let alphas: Vec<AlphaMatte> = ids
            .iter()
            .map(|id| result.gt.get(id).expect("gt holds every layer").frames()[t].clone())
            .collect();
        writer.write_frame(&result.frames[t], &result.backgrounds[t], &colours, &alphas)?;
    }
    writer.finish(&result.provenance)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub clip_id: String,
    pub tolerance: f64,
    pub per_frame: Vec<f64>,
    pub max_residual: f64,
    pub failing_frames: Vec<usize>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failing_frames.is_empty()
    }
}

/// Recomputes the composition residual of every stored frame.
pub fn validate_clip(clip_dir: &Path, tolerance: f64) -> Result<ValidationReport> {
    let prov_path = clip_dir.join(PROVENANCE_FILE);
    if !prov_path.is_file() {
        return Err(Error::MissingProvenance(prov_path));
    }
    let provenance: Provenance = read_json(&prov_path)?;
    let manifest = ClipManifest::read(&clip_dir.join(MANIFEST_FILE))?;
    let ids = provenance.instance_ids();
    if ids != manifest.gt_instances {
        return Err(Error::InvalidValue(format!(
            "provenance layers {ids:?} disagree with manifest instances {:?}",
            manifest.gt_instances
        )));
    }
    let per_frame = (0..manifest.frame_count)
        .into_par_iter()
        .map(|t| {
            let name = frame_file_name(t);
            let image = load_rgb(&image_dir(clip_dir).join(&name))?;
            let bg = load_rgb(&background_dir(clip_dir).join(&name))?;
            let layers = ids
                .iter()
                .map(|id| {
                    Ok((
                        load_rgb(&foreground_dir(clip_dir, id).join(&name))?,
                        load_matte(&clip_dir.join(id).join(&name))?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<_> = layers.iter().map(|(f, a)| (f, a)).collect();
            composition_residual(&image, &refs, &bg)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_residual = per_frame.iter().copied().fold(0.0, f64::max);
    let failing_frames = per_frame
        .iter()
        .enumerate()
        .filter(|(_, &r)| !(r <= tolerance))
        .map(|(t, _)| t)
        .collect();
    Ok(ValidationReport {
        clip_id: manifest.clip_id,
        tolerance,
        per_frame,
        max_residual,
        failing_frames,
    })
}
