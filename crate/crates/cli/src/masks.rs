use std::path::Path;

use vimbench_core::augment::{augment_sequence, salt_pepper, AugmentConfig};
use vimbench_core::io::{load_mask_sequence, load_matte_sequence, save_instance_set, save_mask_sequence, BitDepth, ClipManifest, MANIFEST_FILE};
use vimbench_core::linker::{link_mattes, LinkConfig};
use vimbench_core::Error;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug)]
pub enum AugmentMode {
    /// Config file contents (JSON text).
    Config(String),
    SaltPepper(f64),
}

fn missing_seed() -> CliError {
    CliError::Layout(Error::InvalidConfig("augmentation needs a seed (--seed or \"seed\" in the config)".into()))
}

/// Reads masks from `input`, perturbs them and writes them to `output`.
pub fn cmd_augment(input: &Path, output: &Path, mode: &AugmentMode, seed: Option<u64>) -> CliResult<()> {
    let masks = load_mask_sequence(input)?;
    let out = match mode {
        AugmentMode::SaltPepper(f) => salt_pepper(&masks, *f, seed.ok_or_else(missing_seed)?)?,
        AugmentMode::Config(text) => {
            let value: serde_json::Value = serde_json::from_str(text)
                .map_err(|e| CliError::Layout(Error::InvalidConfig(format!("augment config: {e}"))))?;
            if seed.is_none() && value.get("seed").is_none() {
                return Err(missing_seed());
            }
            let mut cfg: AugmentConfig = serde_json::from_value(value)
                .map_err(|e| CliError::Layout(Error::InvalidConfig(format!("augment config: {e}"))))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            augment_sequence(&masks, &cfg)?
        }
    };
    save_mask_sequence(&out, output)?;
    Ok(())
}

/// Links the merged mattes in `input` and writes one directory per track,
/// plus a manifest, to `output`.
pub fn cmd_link(input: &Path, output: &Path, cfg: &LinkConfig) -> CliResult<ClipManifest> {
    let mattes = load_matte_sequence(input, None)?;
    let set = link_mattes(&mattes, cfg)?;
    save_instance_set(&set, output, BitDepth::Sixteen)?;
    let clip_id = output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let (height, width) = set.dims();
    let manifest = ClipManifest {
        clip_id,
        frame_count: set.frame_count(),
        width,
        height,
        gt_instances: set.ids().map(str::to_owned).collect(),
    };
    manifest.write(&output.join(MANIFEST_FILE))?;
    Ok(manifest)
}
