//! Frame providers for clip generation, in memory or lazily from disk.

use std::path::{Path, PathBuf};

use super::{BackgroundClip, ForegroundClip, ForegroundFrame};
use crate::error::{Error, Result};
use crate::io::{load_matte, load_rgb, rgb_frame_paths};
use crate::matte::RgbImage;

pub trait BackgroundSource: Sync {
    /// Name recorded in provenance.
    fn source_id(&self) -> String;
    fn frame_count(&self) -> usize;
    fn frame(&self, index: usize) -> Result<RgbImage>;
}

pub trait ForegroundSource: Sync {
    fn source_id(&self) -> String;
    fn frame_count(&self) -> usize;
    /// Source resolution as `(height, width)`.
    fn dims(&self) -> Result<(usize, usize)>;
    fn frame(&self, index: usize) -> Result<ForegroundFrame>;
}

fn out_of_range(index: usize, len: usize) -> Error {
    Error::InsufficientFrames {
        needed: index + 1,
        available: len,
    }
}

impl BackgroundSource for BackgroundClip {
    fn source_id(&self) -> String {
        "memory".into()
    }

    fn frame_count(&self) -> usize {
        self.frames.len()
    }

    fn frame(&self, index: usize) -> Result<RgbImage> {
        self.frames
            .get(index)
            .cloned()
            .ok_or_else(|| out_of_range(index, self.frames.len()))
    }
}

impl ForegroundSource for ForegroundClip {
    fn source_id(&self) -> String {
        self.instance_id.clone()
    }

    fn frame_count(&self) -> usize {
        self.frames.len()
    }

    fn dims(&self) -> Result<(usize, usize)> {
        self.frames
            .first()
            .map(|f| f.alpha.dims())
            .ok_or_else(|| out_of_range(0, 0))
    }

    fn frame(&self, index: usize) -> Result<ForegroundFrame> {
        self.frames
            .get(index)
            .cloned()
            .ok_or_else(|| out_of_range(index, self.frames.len()))
    }
}

/// A directory of numbered RGB frames.
#[derive(Clone, Debug)]
pub struct DiskBackground {
    dir: PathBuf,
    paths: Vec<PathBuf>,
}

impl DiskBackground {
    pub fn open(dir: &Path) -> Result<Self> {
        Ok(Self {
            dir: dir.to_owned(),
            paths: rgb_frame_paths(dir)?,
        })
    }
}

impl BackgroundSource for DiskBackground {
    fn source_id(&self) -> String {
        self.dir.display().to_string()
    }

    fn frame_count(&self) -> usize {
        self.paths.len()
    }

    fn frame(&self, index: usize) -> Result<RgbImage> {
        let path = self
            .paths
            .get(index)
            .ok_or_else(|| out_of_range(index, self.paths.len()))?;
        load_rgb(path)
    }
}

/// A foreground asset directory with `fgr/` colour and `pha/` alpha frames.
#[derive(Clone, Debug)]
pub struct DiskForeground {
    dir: PathBuf,
    rgb: Vec<PathBuf>,
    alpha: Vec<PathBuf>,
}

impl DiskForeground {
    pub fn open(dir: &Path) -> Result<Self> {
        let rgb = rgb_frame_paths(&dir.join("fgr"))?;
        let alpha = rgb_frame_paths(&dir.join("pha"))?;
        if rgb.len() != alpha.len() {
            return Err(Error::shape(format!(
                "{}: {} colour frames but {} alpha frames",
                dir.display(),
                rgb.len(),
                alpha.len()
            )));
        }
        Ok(Self {
            dir: dir.to_owned(),
            rgb,
            alpha,
        })
    }
}

impl ForegroundSource for DiskForeground {
    fn source_id(&self) -> String {
        self.dir.display().to_string()
    }

    fn frame_count(&self) -> usize {
        self.rgb.len()
    }

    fn dims(&self) -> Result<(usize, usize)> {
        Ok(load_matte(&self.alpha[0])?.dims())
    }

    fn frame(&self, index: usize) -> Result<ForegroundFrame> {
        if index >= self.rgb.len() {
            return Err(out_of_range(index, self.rgb.len()));
        }
        ForegroundFrame::new(load_rgb(&self.rgb[index])?, load_matte(&self.alpha[index])?)
    }
}
