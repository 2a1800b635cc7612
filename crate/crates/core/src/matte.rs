//! Pixel grids shared by every module: alpha mattes, binary masks, RGB
//! frames and the per-instance sequence containers built from them.
//!
//! Mattes are stored in single precision. Every reduction over them
//! (means, sums, IoU counts) is carried out in `f64` by the consumers.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

fn check_dims(height: usize, width: usize, len: usize, per_pixel: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::shape(format!(
            "grid must be at least 1x1, got {height}x{width}"
        )));
    }
    if height * width * per_pixel != len {
        return Err(Error::shape(format!(
            "{height}x{width} grid needs {} values, got {len}",
            height * width * per_pixel
        )));
    }
    Ok(())
}

/// A single-frame alpha matte with every value in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaMatte {
    height: usize,
    width: usize,
    values: Vec<f32>,
}

impl AlphaMatte {
    pub fn new(height: usize, width: usize, values: Vec<f32>) -> Result<Self> {
        check_dims(height, width, values.len(), 1)?;
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidValue(format!(
                "alpha value {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    /// Builds a matte from values the caller guarantees are in range.
    pub(crate) fn from_raw(height: usize, width: usize, values: Vec<f32>) -> Self {
        debug_assert_eq!(values.len(), height * width);
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        Self {
            height,
            width,
            values,
        }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    /// Constant matte; `value` is clamped into `[0, 1]`.
    pub fn filled(height: usize, width: usize, value: f32) -> Self {
        assert!(height > 0 && width > 0, "matte must be at least 1x1");
        Self::from_raw(height, width, vec![value.clamp(0.0, 1.0); height * width])
    }

    /// Evaluates `f(row, col)` at every pixel, clamping the result into `[0, 1]`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        assert!(height > 0 && width > 0, "matte must be at least 1x1");
        let mut values = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                let v = f(y, x);
                values.push(if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) });
            }
        }
        Self::from_raw(height, width, values)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.width + col]
    }

    /// Sum of all alpha values.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum()
    }
}

/// A boolean grid, typically the binarization of an [`AlphaMatte`] or a
/// mask-guidance frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(height, width, bits.len(), 1)?;
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub fn empty(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "mask must be at least 1x1");
        Self {
            height,
            width,
            bits: vec![false; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = Self::empty(height, width);
        for y in 0..height {
            for x in 0..width {
                mask.bits[y * width + x] = f(y, x);
            }
        }
        mask
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_clear(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Pixelwise OR with `other`.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::shape(format!(
                "mask union {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    /// Tight bounding box of the set bits as `(row0, col0, row1, col1)`,
    /// inclusive, or `None` for an empty mask.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &b)| b) {
            let (y, x) = (i / self.width, i % self.width);
            bbox = Some(match bbox {
                None => (y, x, y, x),
                Some((y0, x0, y1, x1)) => (y0.min(y), x0.min(x), y1.max(y), x1.max(x)),
            });
        }
        bbox
    }

    /// The mask as a hard 0/1 matte.
    pub fn to_matte(&self) -> AlphaMatte {
        AlphaMatte::from_raw(
            self.height,
            self.width,
            self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
    }
}

/// Straight (un-premultiplied) RGB frame with channels in `[0, 1]`,
/// stored interleaved in double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl RgbImage {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(height, width, data.len(), 3)?;
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidValue(format!(
                "colour value {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub(crate) fn from_raw(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width * 3);
        Self {
            height,
            width,
            data,
        }
    }

    pub fn filled(height: usize, width: usize, rgb: [f64; 3]) -> Self {
        Self::from_fn(height, width, |_, _| rgb)
    }

    /// Evaluates `f(row, col)` at every pixel, clamping channels into `[0, 1]`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        assert!(height > 0 && width > 0, "image must be at least 1x1");
        let mut data = Vec::with_capacity(height * width * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend(f(y, x).iter().map(|c| if c.is_nan() { 0.0 } else { c.clamp(0.0, 1.0) }));
            }
        }
        Self::from_raw(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// The alpha mattes of one instance over `T` frames.
#[derive(Clone, Debug, PartialEq)]
pub struct MatteSequence {
    instance_id: String,
    frames: Vec<AlphaMatte>,
}

impl MatteSequence {
    pub fn new(instance_id: impl Into<String>, frames: Vec<AlphaMatte>) -> Result<Self> {
        let instance_id = instance_id.into();
        let Some(first) = frames.first() else {
            return Err(Error::shape(format!(
                "sequence `{instance_id}` has no frames"
            )));
        };
        let dims = first.dims();
        if let Some((t, f)) = frames.iter().enumerate().find(|(_, f)| f.dims() != dims) {
            return Err(Error::shape(format!(
                "sequence `{instance_id}` frame {t} is {:?}, frame 0 is {dims:?}",
                f.dims()
            )));
        }
        Ok(Self {
            instance_id,
            frames,
        })
    }

    pub fn instance_id(&self) -> &str {
        &self.instance_id
    }

    pub fn with_id(mut self, instance_id: impl Into<String>) -> Self {
        self.instance_id = instance_id.into();
        self
    }

    pub fn frames(&self) -> &[AlphaMatte] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<AlphaMatte> {
        self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    pub fn binarize(&self, threshold: f32) -> MaskSequence {
        MaskSequence {
            frames: self
                .frames
                .iter()
                .map(|f| crate::metrics::binarize(f, threshold))
                .collect(),
        }
    }
}

/// Ordered binary masks of one instance (or one guidance channel).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskSequence {
    frames: Vec<BinaryMask>,
}

impl MaskSequence {
    pub fn new(frames: Vec<BinaryMask>) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::shape("mask sequence has no frames"));
        };
        let dims = first.dims();
        if let Some((t, f)) = frames.iter().enumerate().find(|(_, f)| f.dims() != dims) {
            return Err(Error::shape(format!(
                "mask frame {t} is {:?}, frame 0 is {dims:?}",
                f.dims()
            )));
        }
        Ok(Self { frames })
    }

    pub fn empty(frame_count: usize, height: usize, width: usize) -> Self {
        Self {
            frames: vec![BinaryMask::empty(height, width); frame_count.max(1)],
        }
    }

    pub fn frames(&self) -> &[BinaryMask] {
        &self.frames
    }

    pub fn frames_mut(&mut self) -> &mut [BinaryMask] {
        &mut self.frames
    }

    pub fn into_frames(self) -> Vec<BinaryMask> {
        self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    pub fn count_ones(&self) -> usize {
        self.frames.iter().map(BinaryMask::count_ones).sum()
    }

    pub fn to_mattes(&self, instance_id: impl Into<String>) -> MatteSequence {
        MatteSequence {
            instance_id: instance_id.into(),
            frames: self.frames.iter().map(BinaryMask::to_matte).collect(),
        }
    }
}

/// Instance matte sequences keyed by id, all sharing `T`, `H` and `W`.
///
/// Iteration order is the lexicographic order of the ids.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSet {
    frame_count: usize,
    height: usize,
    width: usize,
    sequences: BTreeMap<String, MatteSequence>,
}

impl InstanceSet {
    pub fn empty(frame_count: usize, height: usize, width: usize) -> Self {
        Self {
            frame_count,
            height,
            width,
            sequences: BTreeMap::new(),
        }
    }

    /// Collects sequences into a set whose shape is taken from the first one.
    pub fn from_sequences(sequences: impl IntoIterator<Item = MatteSequence>) -> Result<Self> {
        let mut iter = sequences.into_iter().peekable();
        let Some(first) = iter.peek() else {
            return Err(Error::shape(
                "cannot infer instance set shape from zero sequences",
            ));
        };
        let (h, w) = first.dims();
        let mut set = Self::empty(first.frame_count(), h, w);
        for seq in iter {
            set.insert(seq)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, seq: MatteSequence) -> Result<()> {
        if seq.frame_count() != self.frame_count || seq.dims() != (self.height, self.width) {
            return Err(Error::shape(format!(
                "instance `{}` is {}x{:?}, set is {}x{:?}",
                seq.instance_id(),
                seq.frame_count(),
                seq.dims(),
                self.frame_count,
                (self.height, self.width)
            )));
        }
        if self.sequences.contains_key(seq.instance_id()) {
            return Err(Error::InvalidValue(format!(
                "duplicate instance id `{}`",
                seq.instance_id()
            )));
        }
        self.sequences.insert(seq.instance_id().to_owned(), seq);
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&MatteSequence> {
        self.sequences.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.sequences.keys().map(String::as_str)
    }

    pub fn sequences(&self) -> impl Iterator<Item = &MatteSequence> {
        self.sequences.values()
    }

    pub fn into_sequences(self) -> impl Iterator<Item = MatteSequence> {
        self.sequences.into_values()
    }

    /// True when both sets share `T`, `H` and `W`.
    pub fn same_shape(&self, other: &InstanceSet) -> bool {
        self.frame_count == other.frame_count && self.dims() == other.dims()
    }
}
