use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use vimbench_core::compositor::store::{validate_clip, ClipWriter, ValidationReport, PROVENANCE_FILE};
use vimbench_core::compositor::{
    clip_seed, generate_clip_streaming, instance_id, BackgroundSource, ClipParams, DiskBackground, DiskForeground,
    ForegroundSource, PlacementConfig,
};
use vimbench_core::io::{list_clips, read_json, ClipManifest, MANIFEST_FILE};
use vimbench_core::Error;

use crate::error::{CliError, CliResult};

/// One clip of a composite spec file.
#[derive(Clone, Debug, Deserialize)]
pub struct ClipEntry {
    #[serde(default)]
    pub id: Option<String>,
    pub background: PathBuf,
    pub foregrounds: Vec<PathBuf>,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub placement: Option<PlacementConfig>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct CompositeFile {
    pub seed: Option<u64>,
    pub clips: Vec<ClipEntry>,
    #[serde(default)]
    pub placement: PlacementConfig,
    #[serde(default)]
    pub instance_range: Option<(usize, usize)>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_owned()
    } else {
        base.join(p)
    }
}

fn composite_one(
    file: &CompositeFile,
    base: &Path,
    index: usize,
    seed: u64,
    out_root: &Path,
) -> CliResult<ClipManifest> {
    let entry = &file.clips[index];
    let clip_id = entry.id.clone().unwrap_or_else(|| format!("clip{index:03}"));
    let background = DiskBackground::open(&resolve(base, &entry.background))?;
    let foregrounds = entry
        .foregrounds
        .iter()
        .map(|p| DiskForeground::open(&resolve(base, p)))
        .collect::<Result<Vec<_>, _>>()?;
    let fg_refs: Vec<&dyn ForegroundSource> = foregrounds.iter().map(|f| f as &dyn ForegroundSource).collect();
    let mut params = ClipParams::new(entry.frames, entry.height, entry.width, clip_seed(seed, index));
    params.placement = entry.placement.clone().unwrap_or_else(|| file.placement.clone());
    if let Some(range) = file.instance_range {
        params.instance_range = range;
    }
    let ids = (0..foregrounds.len()).map(instance_id).collect();
    let mut writer = ClipWriter::create(out_root, &clip_id, ids)?;
    let provenance = generate_clip_streaming(&background as &dyn BackgroundSource, &fg_refs, &params, |rec| {
        writer.write_record(&rec)
    })?;
    Ok(writer.finish(&provenance)?)
}

/// Generates every clip of the spec file under `out_root`.
pub fn cmd_composite(spec_path: &Path, out_root: &Path, seed_override: Option<u64>) -> CliResult<Vec<ClipManifest>> {
    let file: CompositeFile = read_json(spec_path)?;
    let seed = seed_override
        .or(file.seed)
        .ok_or_else(|| CliError::Layout(Error::InvalidConfig("composite spec needs a seed".into())))?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    (0..file.clips.len())
        .into_par_iter()
        .map(|i| composite_one(&file, base, i, seed, out_root))
        .collect()
}

fn is_clip_dir(dir: &Path) -> bool {
    dir.join(MANIFEST_FILE).is_file() || dir.join(PROVENANCE_FILE).is_file()
}

/// Validates one clip directory or every clip below a root.
pub fn cmd_validate(clip_root: &Path, tolerance: f64) -> CliResult<Vec<ValidationReport>> {
    let dirs: Vec<PathBuf> = if is_clip_dir(clip_root) {
        vec![clip_root.to_owned()]
    } else {
        list_clips(clip_root)?.into_iter().map(|c| clip_root.join(c)).collect()
    };
    if dirs.is_empty() {
        return Err(Error::InvalidValue(format!("no clips under {}", clip_root.display())).into());
    }
    dirs.par_iter()
        .map(|d| validate_clip(d, tolerance).map_err(CliError::from))
        .collect()
}
