//! Seeded clip generation on top of [`composite_frame`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::source::{BackgroundSource, ForegroundSource};
use super::warp::{fit_rgb, warp_frame, Affine};
use super::{composite_frame, BackgroundClip, CompositedFrame, ForegroundClip, ForegroundFrame};
use crate::error::{Error, Result};
use crate::matte::{AlphaMatte, InstanceSet, MatteSequence, RgbImage};

/// Random placement ranges. Scales are relative to fitting the source height
/// to the output height; centres are fractions of the output size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlacementConfig {
    pub scale_range: (f64, f64),
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Explicit per-layer transforms; when set, no placement is drawn.
    pub fixed: Option<Vec<Affine>>,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            scale_range: (0.5, 0.9),
            x_range: (0.2, 0.8),
            y_range: (0.45, 0.65),
            fixed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipParams {
    pub frame_count: usize,
    pub height: usize,
    pub width: usize,
    pub seed: u64,
    #[serde(default)]
    pub placement: PlacementConfig,
    /// Inclusive bounds on the number of foreground layers.
    #[serde(default = "default_instance_range")]
    pub instance_range: (usize, usize),
}

fn default_instance_range() -> (usize, usize) {
    (2, 4)
}

impl ClipParams {
    pub fn new(frame_count: usize, height: usize, width: usize, seed: u64) -> Self {
        Self {
            frame_count,
            height,
            width,
            seed,
            placement: PlacementConfig::default(),
            instance_range: default_instance_range(),
        }
    }
}

/// Everything needed to synthesise one clip in memory. Foregrounds are
/// ordered back to front.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeSpec {
    pub background: BackgroundClip,
    pub foregrounds: Vec<ForegroundClip>,
    pub params: ClipParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerProvenance {
    pub instance_id: String,
    pub source: String,
    pub start_frame: usize,
    pub transform: Affine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub frame_count: usize,
    pub height: usize,
    pub width: usize,
    pub background: String,
    pub background_start: usize,
    /// Back to front.
    pub layers: Vec<LayerProvenance>,
}

impl Provenance {
    pub fn instance_ids(&self) -> Vec<String> {
        self.layers.iter().map(|l| l.instance_id.clone()).collect()
    }
}

/// One generated frame, handed to the sink of [`generate_clip_streaming`].
#[derive(Clone, Debug)]
pub struct FrameRecord {
    pub index: usize,
    pub background: RgbImage,
    /// Placed foregrounds, back to front, with the source (unattenuated) alpha.
    pub layers: Vec<ForegroundFrame>,
    pub composite: CompositedFrame,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositeResult {
    pub frames: Vec<RgbImage>,
    pub gt: InstanceSet,
    /// Placed foreground colour per layer and frame, back to front.
    pub foreground_rgb: Vec<Vec<RgbImage>>,
    pub backgrounds: Vec<RgbImage>,
    pub provenance: Provenance,
}

/// Seed of clip `index` in a multi-clip benchmark (splitmix64 finaliser).
pub fn clip_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn instance_id(layer: usize) -> String {
    format!("inst{layer:02}")
}

fn check_params(params: &ClipParams, layers: usize) -> Result<()> {
    let (lo, hi) = params.instance_range;
    if params.frame_count == 0 || params.height == 0 || params.width == 0 {
        return Err(Error::InvalidConfig(
            "frame count and output size must be positive".into(),
        ));
    }
    if lo > hi || layers < lo || layers > hi {
        return Err(Error::InvalidConfig(format!(
            "{layers} foregrounds outside the allowed range {lo}..={hi}"
        )));
    }
    if let Some(fixed) = &params.placement.fixed {
        if fixed.len() != layers {
            return Err(Error::InvalidConfig(format!(
                "{} fixed transforms for {layers} foregrounds",
                fixed.len()
            )));
        }
    }
    let p = &params.placement;
    for (name, (a, b)) in [("scale", p.scale_range), ("x", p.x_range), ("y", p.y_range)] {
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(Error::InvalidConfig(format!("bad {name} range ({a}, {b})")));
        }
    }
    if p.scale_range.0 <= 0.0 {
        return Err(Error::InvalidConfig("scales must be positive".into()));
    }
    Ok(())
}

fn draw_offset(rng: &mut ChaCha8Rng, available: usize, needed: usize) -> Result<usize> {
    if available < needed {
        return Err(Error::InsufficientFrames { needed, available });
    }
    Ok(rng.random_range(0..=available - needed))
}

fn draw_in(rng: &mut ChaCha8Rng, (a, b): (f64, f64)) -> f64 {
    if a == b {
        a
    } else {
        rng.random_range(a..b)
    }
}

/// Draws offsets and transforms. Draw order: background offset, then per
/// foreground its offset, scale and centre.
fn plan(
    background: &dyn BackgroundSource,
    foregrounds: &[&dyn ForegroundSource],
    params: &ClipParams,
) -> Result<Provenance> {
    check_params(params, foregrounds.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let t = params.frame_count;
    let background_start = draw_offset(&mut rng, background.frame_count(), t)?;
    let (out_h, out_w) = (params.height as f64, params.width as f64);
    let p = &params.placement;
    let mut layers = Vec::with_capacity(foregrounds.len());
    for (k, fg) in foregrounds.iter().enumerate() {
        let start_frame = draw_offset(&mut rng, fg.frame_count(), t)?;
        let transform = match &p.fixed {
            Some(fixed) => fixed[k],
            None => {
                let (src_h, src_w) = fg.dims()?;
                let scale = out_h / src_h as f64 * draw_in(&mut rng, p.scale_range);
                let cx = draw_in(&mut rng, p.x_range) * out_w;
                let cy = draw_in(&mut rng, p.y_range) * out_h;
                Affine::scale_translate(
                    scale,
                    cx - scale * src_w as f64 / 2.0,
                    cy - scale * src_h as f64 / 2.0,
                )
            }
        };
        layers.push(LayerProvenance {
            instance_id: instance_id(k),
            source: fg.source_id(),
            start_frame,
            transform,
        });
    }
    Ok(Provenance {
        seed: params.seed,
        frame_count: t,
        height: params.height,
        width: params.width,
        background: background.source_id(),
        background_start,
        layers,
    })
}

/// Generates a clip frame by frame, handing each frame to `sink` so that
/// only one frame is resident at a time. Returns the provenance record.
pub fn generate_clip_streaming(
    background: &dyn BackgroundSource,
    foregrounds: &[&dyn ForegroundSource],
    params: &ClipParams,
    mut sink: impl FnMut(FrameRecord) -> Result<()>,
) -> Result<Provenance> {
    let prov = plan(background, foregrounds, params)?;
    let (h, w) = (params.height, params.width);
    for index in 0..params.frame_count {
        let bg = fit_rgb(&background.frame(prov.background_start + index)?, h, w);
        let layers = foregrounds
            .iter()
            .zip(&prov.layers)
            .map(|(fg, lp)| warp_frame(&fg.frame(lp.start_frame + index)?, &lp.transform, h, w))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<(&RgbImage, &AlphaMatte)> = layers.iter().map(|l| (&l.rgb, &l.alpha)).collect();
        let composite = composite_frame(&bg, &refs)?;
        sink(FrameRecord {
            index,
            background: bg,
            layers,
            composite,
        })?;
    }
    Ok(prov)
}

/// In-memory generation: a pure function of the spec and its seed.
pub fn generate_clip(spec: &CompositeSpec) -> Result<CompositeResult> {
    let fgs: Vec<&dyn ForegroundSource> = spec.foregrounds.iter().map(|f| f as &dyn ForegroundSource).collect();
    let n = fgs.len();
    let mut frames = Vec::with_capacity(spec.params.frame_count);
    let mut backgrounds = Vec::with_capacity(spec.params.frame_count);
    let mut alphas: Vec<Vec<AlphaMatte>> = vec![Vec::new(); n];
    let mut colours: Vec<Vec<RgbImage>> = vec![Vec::new(); n];
    let mut provenance = generate_clip_streaming(&spec.background, &fgs, &spec.params, |rec| {
        frames.push(rec.composite.rgb);
        backgrounds.push(rec.background);
        for (k, (a, l)) in rec.composite.alphas.into_iter().zip(rec.layers).enumerate() {
            alphas[k].push(a);
            colours[k].push(l.rgb);
        }
        Ok(())
    })?;
    for (lp, fg) in provenance.layers.iter_mut().zip(&spec.foregrounds) {
        lp.source = fg.instance_id.clone();
    }
    let gt = InstanceSet::from_sequences(
        alphas
            .into_iter()
            .enumerate()
            .map(|(k, a)| MatteSequence::new(instance_id(k), a))
            .collect::<Result<Vec<_>>>()?,
    )?;
    Ok(CompositeResult {
        frames,
        gt,
        foreground_rgb: colours,
        backgrounds,
        provenance,
    })
}

/// Instance counts for a benchmark of `clips` clips, split 70/20/10 over
/// 2, 3 and 4 foregrounds (largest remainder, ties to fewer instances).
pub fn benchmark_mix(clips: usize) -> Vec<usize> {
    let shares = [(2usize, 7usize), (3, 2), (4, 1)];
    let mut counts: Vec<(usize, usize, usize)> = shares
        .iter()
        .map(|&(n, s)| (n, clips * s / 10, clips * s % 10))
        .collect();
    let mut left = clips - counts.iter().map(|c| c.1).sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| counts[b].2.cmp(&counts[a].2).then(a.cmp(&b)));
    for &i in &order {
        if left == 0 {
            break;
        }
        counts[i].1 += 1;
        left -= 1;
    }
    counts
        .into_iter()
        .flat_map(|(n, c, _)| std::iter::repeat_n(n, c))
        .collect()
}
