//! In-memory raster types shared by every module.
//!
//! All planes are row-major with non-zero dimensions. Constructors validate
//! their invariants, so code holding a plane can rely on them.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Element types a [`Plane`] may hold, with their per-value invariant.
pub trait PlaneValue: Copy + PartialEq + std::fmt::Debug + Send + Sync {
    fn is_valid(&self) -> bool {
        true
    }
}

impl PlaneValue for f32 {
    fn is_valid(&self) -> bool {
        self.is_finite()
    }
}

impl PlaneValue for f64 {
    fn is_valid(&self) -> bool {
        self.is_finite()
    }
}

impl PlaneValue for bool {}
impl PlaneValue for i32 {}
impl PlaneValue for u32 {}
impl PlaneValue for u8 {}

#[derive(Debug, Clone, PartialEq)]
pub struct Plane<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

/// Real-valued plane (attention heads, saliency and prediction maps).
pub type FloatPlane = Plane<f32>;

/// Boolean plane (Otsu foreground, cluster membership, ground truth).
pub type BinaryMask = Plane<bool>;

impl<T: PlaneValue> Plane<T> {
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::EmptyPlane { height, width });
        }
        if height.checked_mul(width) != Some(data.len()) {
            return Err(Error::LengthMismatch { height, width, len: data.len() });
        }
        if let Some(index) = data.iter().position(|v| !v.is_valid()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Plane { height, width, data })
    }

    /// Plane with every element set to `value`.
    ///
    /// # Panics
    /// If either dimension is zero or `value` is invalid for `T`.
    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Self::new(height, width, vec![value; height * width]).expect("invalid filled plane")
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(height, width)`
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.width + col]
    }

    pub fn map<U: PlaneValue>(&self, f: impl FnMut(T) -> U) -> Result<Plane<U>> {
        Plane::new(self.height, self.width, self.data.iter().copied().map(f).collect())
    }

    pub(crate) fn ensure_same_dims<U>(&self, other: &Plane<U>, context: &str) -> Result<()> {
        if self.dims() == (other.height, other.width) {
            Ok(())
        } else {
            Err(Error::dims(context, self.dims(), (other.height, other.width)))
        }
    }
}

impl FloatPlane {
    /// Checks that every element lies in `[0, 1]`.
    pub fn ensure_unit_range(&self) -> Result<()> {
        match self.data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            Some(index) => Err(Error::OutOfRange { index, value: self.data[index] as f64 }),
            None => Ok(()),
        }
    }
}

impl BinaryMask {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> Result<usize> {
        self.ensure_same_dims(other, "mask intersection")?;
        Ok(self.data.iter().zip(&other.data).filter(|(a, b)| **a && **b).count())
    }

    pub fn complement(&self) -> BinaryMask {
        Plane { height: self.height, width: self.width, data: self.data.iter().map(|b| !b).collect() }
    }

    /// 0.0/1.0 float view, handy when a binary mask stands in for a prediction.
    pub fn to_float(&self) -> FloatPlane {
        Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// Per-pixel weights in `[0, 1]`: soft predictions or hard masks.
pub trait PixelWeights {
    fn dims(&self) -> (usize, usize);
    fn weight(&self, index: usize) -> f64;
}

impl PixelWeights for FloatPlane {
    fn dims(&self) -> (usize, usize) {
        Plane::dims(self)
    }

    fn weight(&self, index: usize) -> f64 {
        self.data[index] as f64
    }
}

impl PixelWeights for BinaryMask {
    fn dims(&self) -> (usize, usize) {
        Plane::dims(self)
    }

    fn weight(&self, index: usize) -> f64 {
        if self.data[index] {
            1.0
        } else {
            0.0
        }
    }
}

/// Self-attention planes of one image, one per transformer head.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionStack {
    heads: Vec<FloatPlane>,
}

impl AttentionStack {
    pub fn new(heads: Vec<FloatPlane>) -> Result<Self> {
        let first = heads.first().ok_or(Error::NoHeads)?;
        for head in &heads[1..] {
            first.ensure_same_dims(head, "attention heads")?;
        }
        Ok(AttentionStack { heads })
    }

    pub fn heads(&self) -> &[FloatPlane] {
        &self.heads
    }

    pub fn n_heads(&self) -> usize {
        self.heads.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.heads[0].dims()
    }

    pub fn into_heads(self) -> Vec<FloatPlane> {
        self.heads
    }
}

/// Unsupervised segmentation labels of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMap {
    labels: Plane<u32>,
    num_categories: u32,
}

impl ClusterMap {
    /// Category count is one past the largest label present.
    pub fn new(labels: Plane<u32>) -> Self {
        let num_categories = labels.as_slice().iter().max().map_or(0, |&m| m + 1);
        ClusterMap { labels, num_categories }
    }

    pub fn from_signed(labels: Plane<i32>) -> Result<Self> {
        if let Some(index) = labels.as_slice().iter().position(|&l| l < 0) {
            return Err(Error::NegativeLabel { index, label: labels.as_slice()[index] });
        }
        Ok(Self::new(labels.map(|l| l as u32)?))
    }

    pub fn labels(&self) -> &Plane<u32> {
        &self.labels
    }

    pub fn num_categories(&self) -> u32 {
        self.num_categories
    }

    pub fn dims(&self) -> (usize, usize) {
        self.labels.dims()
    }

    /// Pixel count of every label present.
    pub fn histogram(&self) -> BTreeMap<u32, usize> {
        let mut counts = BTreeMap::new();
        for &l in self.labels.as_slice() {
            *counts.entry(l).or_insert(0) += 1;
        }
        counts
    }

    pub fn categories(&self) -> BTreeSet<u32> {
        self.labels.as_slice().iter().copied().collect()
    }

    /// Membership mask of one category.
    pub fn category_mask(&self, category: u32) -> BinaryMask {
        self.labels.map(|l| l == category).expect("same dims")
    }

    /// Relabels every pixel through `f`.
    pub fn relabel(&self, f: impl Fn(u32) -> u32) -> ClusterMap {
        ClusterMap::new(self.labels.map(f).expect("same dims"))
    }

    pub fn to_signed(&self) -> Plane<i32> {
        self.labels.map(|l| l as i32).expect("same dims")
    }
}
