//! Instance tracks from instance-agnostic mattes.
//!
//! Each frame is binarised and split into 8-connected components; components
//! of consecutive frames are linked by a minimum-cost assignment on
//! `1 − IoU`, never linking disjoint components.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{hungarian, CostMatrix};
use crate::error::{Error, Result};
use crate::matte::{AlphaMatte, BinaryMask, InstanceSet, MaskSequence, MatteSequence};
use crate::metrics::binarize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub frame: usize,
    /// Entry in [`FrameComponents::labels`], starting at 1.
    pub label: u32,
    pub area: usize,
    /// `(y0, x0, y1, x1)`, inclusive.
    pub bbox: (usize, usize, usize, usize),
}

/// Surviving components of one frame and their label grid (0 = none).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameComponents {
    pub height: usize,
    pub width: usize,
    pub labels: Vec<u32>,
    pub components: Vec<Component>,
}

impl FrameComponents {
    pub fn mask(&self, label: u32) -> BinaryMask {
        BinaryMask::new(self.height, self.width, self.labels.iter().map(|&l| l == label).collect())
            .expect("grid matches dimensions")
    }
}

/// Default minimum area: 100 pixels at 1920×1080, scaled with the pixel count.
pub fn default_min_area(height: usize, width: usize) -> usize {
    (100.0 * (height * width) as f64 / (1920.0 * 1080.0)).round() as usize
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Two-pass union-find labelling with 8-connectivity. Components smaller
/// than `min_area` are dropped; the rest are numbered in raster order of
/// their first pixel.
pub fn connected_components(mask: &BinaryMask, min_area: usize, frame: usize) -> FrameComponents {
    let (h, w) = mask.dims();
    let bits = mask.bits();
    let mut provisional = vec![0u32; h * w];
    let mut parent: Vec<u32> = vec![0];
    for y in 0..h {
        for x in 0..w {
            if !bits[y * w + x] {
                continue;
            }
            let mut neighbours = [0u32; 4];
            let mut n = 0;
            if x > 0 {
                neighbours[n] = provisional[y * w + x - 1];
                n += 1;
            }
            if y > 0 {
                let up = (y - 1) * w;
                for xx in x.saturating_sub(1)..(x + 2).min(w) {
                    neighbours[n] = provisional[up + xx];
                    n += 1;
                }
            }
            let mut label = 0;
            for &l in &neighbours[..n] {
                if l != 0 {
                    if label == 0 {
                        label = l;
                    } else {
                        union(&mut parent, label, l);
                    }
                }
            }
            if label == 0 {
                label = parent.len() as u32;
                parent.push(label);
            }
            provisional[y * w + x] = label;
        }
    }
    // Resolve roots, then count areas per root.
    let roots: Vec<u32> = (0..parent.len() as u32).map(|l| find(&mut parent, l)).collect();
    let mut area = vec![0usize; parent.len()];
    for &l in &provisional {
        if l != 0 {
            area[roots[l as usize] as usize] += 1;
        }
    }
    let mut relabel = vec![0u32; parent.len()];
    let mut components = Vec::new();
    let mut labels = vec![0u32; h * w];
    for y in 0..h {
        for x in 0..w {
            let l = provisional[y * w + x];
            if l == 0 {
                continue;
            }
            let root = roots[l as usize] as usize;
            if area[root] < min_area.max(1) {
                continue;
            }
            if relabel[root] == 0 {
                components.push(Component {
                    frame,
                    label: components.len() as u32 + 1,
                    area: area[root],
                    bbox: (y, x, y, x),
                });
                relabel[root] = components.len() as u32;
            }
            let id = relabel[root];
            labels[y * w + x] = id;
            let b = &mut components[id as usize - 1].bbox;
            b.0 = b.0.min(y);
            b.1 = b.1.min(x);
            b.2 = b.2.max(y);
            b.3 = b.3.max(x);
        }
    }
    FrameComponents {
        height: h,
        width: w,
        labels,
        components,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Track {
    pub track_id: String,
    /// Component label per frame, `None` where the track is absent.
    pub labels: Vec<Option<u32>>,
    pub birth: usize,
    /// Last frame with a component.
    pub death: usize,
}

/// Intersection counts between the labels of two grids, `(a + 1) × (b + 1)`.
fn overlaps(a: &FrameComponents, b: &FrameComponents) -> Vec<usize> {
    let cols = b.components.len() + 1;
    let mut counts = vec![0usize; (a.components.len() + 1) * cols];
    for (&la, &lb) in a.labels.iter().zip(&b.labels) {
        counts[la as usize * cols + lb as usize] += 1;
    }
    counts
}

/// Links components of consecutive frames. Tracks are numbered by birth
/// frame, then by label.
pub fn link_components(frames: &[FrameComponents]) -> Result<Vec<Track>> {
    if let Some(first) = frames.first() {
        if frames.iter().any(|f| (f.height, f.width) != (first.height, first.width)) {
            return Err(Error::shape("component grids differ in size across frames"));
        }
    }
    let n = frames.len();
    let mut tracks: Vec<Track> = Vec::new();
    // Track index of each component of the previous frame.
    let mut prev_tracks: Vec<usize> = Vec::new();
    for (t, cur) in frames.iter().enumerate() {
        let mut cur_tracks = vec![usize::MAX; cur.components.len()];
        if t > 0 && !prev_tracks.is_empty() && !cur.components.is_empty() {
            let prev = &frames[t - 1];
            let counts = overlaps(prev, cur);
            let cols = cur.components.len() + 1;
            let iou = |i: usize, j: usize| {
                let inter = counts[(i + 1) * cols + j + 1];
                let union = prev.components[i].area + cur.components[j].area - inter;
                inter as f64 / union as f64
            };
            let costs = CostMatrix::from_fn(prev.components.len(), cur.components.len(), |i, j| 1.0 - iou(i, j))?;
            for &(i, j) in &hungarian(&costs).pairs {
                if counts[(i + 1) * cols + j + 1] > 0 {
                    cur_tracks[j] = prev_tracks[i];
                }
            }
        }
        for (j, c) in cur.components.iter().enumerate() {
            if cur_tracks[j] == usize::MAX {
                cur_tracks[j] = tracks.len();
                tracks.push(Track {
                    track_id: String::new(),
                    labels: vec![None; n],
                    birth: t,
                    death: t,
                });
            }
            let track = &mut tracks[cur_tracks[j]];
            track.labels[t] = Some(c.label);
            track.death = t;
        }
        prev_tracks = cur_tracks;
    }
    for (k, track) in tracks.iter_mut().enumerate() {
        track.track_id = format!("track{k:03}");
    }
    Ok(tracks)
}

/// Restricts the input matte to each track's component pixels.
pub fn extract_instance_set(
    mattes: &MatteSequence,
    frames: &[FrameComponents],
    tracks: &[Track],
) -> Result<InstanceSet> {
    let (h, w) = mattes.dims();
    let t_len = mattes.frame_count();
    if frames.len() != t_len || frames.iter().any(|f| (f.height, f.width) != (h, w)) {
        return Err(Error::shape("component grids do not match the matte sequence"));
    }
    let mut set = InstanceSet::empty(t_len, h, w);
    for track in tracks {
        if track.labels.len() != t_len {
            return Err(Error::shape(format!("track {} spans {} frames", track.track_id, track.labels.len())));
        }
        let out = (0..t_len)
            .into_par_iter()
            .map(|t| match track.labels[t] {
                None => AlphaMatte::zeros(h, w),
                Some(label) => {
                    let src = mattes.frames()[t].values();
                    let grid = &frames[t].labels;
                    let values = src
                        .iter()
                        .zip(grid)
                        .map(|(&a, &l)| if l == label { a } else { 0.0 })
                        .collect();
                    AlphaMatte::new(h, w, values).expect("values come from a valid matte")
                }
            })
            .collect();
        set.insert(MatteSequence::new(track.track_id.clone(), out)?)?;
    }
    Ok(set)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    /// `None` selects [`default_min_area`] for the clip resolution.
    pub min_area: Option<usize>,
    pub binarize_threshold: f32,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            min_area: None,
            binarize_threshold: 0.0,
        }
    }
}

/// Binarise, label, link and extract in one call.
pub fn link_mattes(mattes: &MatteSequence, cfg: &LinkConfig) -> Result<InstanceSet> {
    let (h, w) = mattes.dims();
    let min_area = cfg.min_area.unwrap_or_else(|| default_min_area(h, w));
    let frames: Vec<FrameComponents> = mattes
        .frames()
        .par_iter()
        .enumerate()
        .map(|(t, m)| connected_components(&binarize(m, cfg.binarize_threshold), min_area, t))
        .collect();
    let tracks = link_components(&frames)?;
    extract_instance_set(mattes, &frames, &tracks)
}

/// Masks of every track, for inspection.
pub fn track_masks(frames: &[FrameComponents], track: &Track) -> MaskSequence {
    MaskSequence::new(
        frames
            .iter()
            .zip(&track.labels)
            .map(|(f, l)| match l {
                Some(l) => f.mask(*l),
                None => BinaryMask::empty(f.height, f.width),
            })
            .collect(),
    )
    .expect("grids share one shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(rows: &[&str]) -> BinaryMask {
        let w = rows[0].len();
        BinaryMask::from_fn(rows.len(), w, |y, x| rows[y].as_bytes()[x] == b'#')
    }

    /// Flood-fill labelling used as an oracle: same partition, raster order.
    fn flood(m: &BinaryMask) -> Vec<u32> {
        let (h, w) = m.dims();
        let mut labels = vec![0u32; h * w];
        let mut next = 0;
        for start in 0..h * w {
            if !m.bits()[start] || labels[start] != 0 {
                continue;
            }
            next += 1;
            let mut stack = vec![start];
            labels[start] = next;
            while let Some(p) = stack.pop() {
                let (y, x) = ((p / w) as i64, (p % w) as i64);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (yy, xx) = (y + dy, x + dx);
                        if yy < 0 || xx < 0 || yy >= h as i64 || xx >= w as i64 {
                            continue;
                        }
                        let q = yy as usize * w + xx as usize;
                        if m.bits()[q] && labels[q] == 0 {
                            labels[q] = next;
                            stack.push(q);
                        }
                    }
                }
            }
        }
        labels
    }

    #[test]
    fn component_examples() {
        assert!(connected_components(&BinaryMask::empty(4, 4), 0, 0).components.is_empty());
        let diag = mask(&["#..", ".#.", "..#"]);
        assert_eq!(connected_components(&diag, 1, 0).components.len(), 1);
        let blobs = mask(&["#####.....", "#####...##", "........#."]);
        let cc = connected_components(&blobs, 5, 0);
        assert_eq!(cc.components.len(), 1);
        assert_eq!(cc.components[0].area, 10);
        assert_eq!(cc.components[0].bbox, (0, 0, 1, 4));
    }

    #[test]
    fn labelling_matches_flood_fill() {
        let m = BinaryMask::from_fn(31, 37, |y, x| (y * 13 + x * 7 + y * x) % 5 < 2);
        assert_eq!(connected_components(&m, 0, 0).labels, flood(&m));
        let u = mask(&["#.#", "#.#", "###"]);
        let cc = connected_components(&u, 0, 0);
        assert_eq!(cc.components.len(), 1);
        assert_eq!(cc.labels, flood(&u));
    }

    fn seq(frames: Vec<BinaryMask>) -> MatteSequence {
        MatteSequence::new("m", frames.iter().map(|m| m.to_matte()).collect()).unwrap()
    }

    fn disc(h: usize, w: usize, cy: f64, cx: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(h, w, |y, x| (y as f64 - cy).powi(2) + (x as f64 - cx).powi(2) <= r * r)
    }

    #[test]
    fn static_blob_single_track() {
        let frames = vec![disc(20, 20, 10.0, 10.0, 4.0); 6];
        let out = link_mattes(&seq(frames), &LinkConfig { min_area: Some(1), ..LinkConfig::default() }).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn disappearing_blob_starts_new_track() {
        let mut frames = vec![disc(20, 40, 10.0, 8.0, 3.0); 3];
        frames.extend(vec![disc(20, 40, 10.0, 30.0, 3.0); 3]);
        let out = link_mattes(&seq(frames), &LinkConfig { min_area: Some(1), ..LinkConfig::default() }).unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn translating_discs_keep_identity() {
        let t = 10;
        let frames: Vec<BinaryMask> = (0..t)
            .map(|k| {
                let mut m = disc(40, 80, 12.0, 10.0 + 2.0 * k as f64, 6.0);
                m.union_with(&disc(40, 80, 28.0, 60.0 - 2.0 * k as f64, 6.0)).unwrap();
                m
            })
            .collect();
        let cc: Vec<_> = frames.iter().enumerate().map(|(k, m)| connected_components(m, 1, k)).collect();
        let tracks = link_components(&cc).unwrap();
        assert_eq!(tracks.len(), 2);
        // Oracle: nearest-centroid assignment; the upper disc is always y < 20.
        for tr in &tracks {
            let masks = track_masks(&cc, tr);
            let upper: Vec<bool> = masks
                .frames()
                .iter()
                .map(|m| m.bounding_box().unwrap().0 < 20)
                .collect();
            assert!(upper.iter().all(|&u| u == upper[0]));
        }
    }

    #[test]
    fn extraction_partitions_support_and_keeps_soft_values() {
        let (h, w) = (10, 20);
        let m = AlphaMatte::from_fn(h, w, |y, x| {
            if (2..8).contains(&y) && (1..6).contains(&x) {
                0.3 + 0.1 * x as f32
            } else if (2..8).contains(&y) && (12..18).contains(&x) {
                1.0
            } else {
                0.0
            }
        });
        let s = MatteSequence::new("m", vec![m.clone(); 3]).unwrap();
        let out = link_mattes(&s, &LinkConfig { min_area: Some(1), ..LinkConfig::default() }).unwrap();
        assert_eq!(out.len(), 2);
        for t in 0..3 {
            for i in 0..h * w {
                let sum: f32 = out.sequences().map(|q| q.frames()[t].values()[i]).sum();
                assert_eq!(sum, m.values()[i]);
            }
        }
        let whole = MatteSequence::new("m", vec![AlphaMatte::from_fn(h, w, |y, _| if y < 5 { 0.5 } else { 0.0 }); 2]).unwrap();
        let one = link_mattes(&whole, &LinkConfig::default()).unwrap();
        assert_eq!(one.get("track000").unwrap().frames(), whole.frames());
    }

    #[test]
    fn min_area_scales_with_resolution() {
        assert_eq!(default_min_area(1080, 1920), 100);
        assert_eq!(default_min_area(540, 960), 25);
    }
}
