//! Pseudo co-saliency masks from attention foregrounds and cluster
//! co-occurrence statistics.
//!
//! For every group:
//!
//! 1. average each image's attention heads and min-max normalize the result;
//! 2. Otsu-binarize the normalized map into a foreground mask;
//! 3. count, for every cluster category, the number of group images it appears in;
//! 4. per image, take the `top_k` most frequent categories present in that image;
//! 5. keep the candidate whose cluster mask overlaps the foreground the most.
//!
//! Categories that appear everywhere but never overlap the attention foreground
//! (sky, floor, walls) lose step 5 even though they win step 4.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::{AttentionStack, BinaryMask, ClusterMap, FloatPlane, Plane};
use crate::tensor_io::GroupBundle;

/// Number of histogram bins and candidate thresholds used by Otsu.
pub const OTSU_LEVELS: usize = 256;

/// Min-max normalized saliency map with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap(FloatPlane);

impl SaliencyMap {
    pub fn new(plane: FloatPlane) -> Result<Self> {
        plane.ensure_unit_range()?;
        Ok(SaliencyMap(plane))
    }

    pub fn plane(&self) -> &FloatPlane {
        &self.0
    }

    pub fn into_plane(self) -> FloatPlane {
        self.0
    }
}

/// Mean of the attention heads, min-max normalized to `[0, 1]`.
///
/// A constant mean map normalizes to all zeros. Normalization runs on the
/// head sum, which has the same min-max image as the mean and keeps the
/// result bit-identical under exact affine rescaling of the inputs.
pub fn average_attention(stack: &AttentionStack) -> SaliencyMap {
    let (h, w) = stack.dims();
    let mut sum = vec![0f64; h * w];
    for head in stack.heads() {
        for (acc, &v) in sum.iter_mut().zip(head.as_slice()) {
            *acc += v as f64;
        }
    }
    let (lo, hi) = sum.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    let data = if range > 0.0 { sum.iter().map(|&v| ((v - lo) / range) as f32).collect() } else { vec![0.0; h * w] };
    SaliencyMap(Plane::new(h, w, data).expect("dims from a valid stack"))
}

/// Histogram level of a value in `[0, 1]`: nearest of the 256 uniform levels.
pub fn quantize(value: f32) -> u8 {
    (value as f64 * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn level_histogram(map: &SaliencyMap) -> [u64; OTSU_LEVELS] {
    let mut hist = [0u64; OTSU_LEVELS];
    for &v in map.plane().as_slice() {
        hist[quantize(v) as usize] += 1;
    }
    hist
}

/// Between-class variance of a split, kept as the exact fraction
/// `numerator / denominator` (proportional to `w0·w1·(μ0 − μ1)²`).
#[derive(Debug, Clone, Copy)]
struct SplitScore {
    numerator: u128,
    denominator: u128,
}

impl SplitScore {
    fn new(below_count: u64, below_sum: u64, total_count: u64, total_sum: u64) -> Self {
        let diff = below_sum as i128 * total_count as i128 - total_sum as i128 * below_count as i128;
        let above_count = total_count - below_count;
        SplitScore { numerator: diff.unsigned_abs().pow(2), denominator: below_count as u128 * above_count as u128 }
    }

    fn beats(&self, other: &SplitScore) -> bool {
        match (self.numerator.checked_mul(other.denominator), other.numerator.checked_mul(self.denominator)) {
            (Some(lhs), Some(rhs)) => lhs > rhs,
            _ => self.numerator as f64 / self.denominator as f64 > other.numerator as f64 / other.denominator as f64,
        }
    }
}

/// Threshold level maximizing between-class variance; classes are
/// `level <= t` and `level > t`. The lowest maximizer wins ties. `None` when
/// fewer than two levels are occupied.
pub fn otsu_threshold(hist: &[u64; OTSU_LEVELS]) -> Option<u8> {
    let total_count: u64 = hist.iter().sum();
    let total_sum: u64 = hist.iter().enumerate().map(|(level, &n)| level as u64 * n).sum();
    let mut below_count = 0u64;
    let mut below_sum = 0u64;
    let mut best: Option<(u8, SplitScore)> = None;
    for (level, &n) in hist.iter().enumerate() {
        below_count += n;
        below_sum += level as u64 * n;
        if below_count == 0 {
            continue;
        }
        if below_count == total_count {
            break;
        }
        let score = SplitScore::new(below_count, below_sum, total_count, total_sum);
        if best.as_ref().is_none_or(|(_, b)| score.beats(b)) {
            best = Some((level as u8, score));
        }
    }
    best.map(|(t, _)| t)
}

/// Otsu foreground mask plus the chosen threshold level.
#[derive(Debug, Clone, PartialEq)]
pub struct OtsuOutcome {
    pub mask: BinaryMask,
    /// `None` marks a degenerate (single-level) map with an empty mask.
    pub threshold: Option<u8>,
}

impl OtsuOutcome {
    pub fn is_degenerate(&self) -> bool {
        self.threshold.is_none()
    }
}

/// Foreground = pixels whose level is strictly above the Otsu threshold.
pub fn otsu_binarize(map: &SaliencyMap) -> OtsuOutcome {
    let threshold = otsu_threshold(&level_histogram(map));
    let mask = match threshold {
        Some(t) => map.plane().map(|v| quantize(v) > t),
        None => map.plane().map(|_| false),
    }
    .expect("same dims");
    OtsuOutcome { mask, threshold }
}

/// Group-level category frequency: number of images containing each category.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable(BTreeMap<u32, usize>);

impl FrequencyTable {
    pub fn get(&self, category: u32) -> usize {
        self.0.get(&category).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, usize)> + '_ {
        self.0.iter().map(|(&c, &n)| (c, n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(u32, usize)> for FrequencyTable {
    fn from_iter<I: IntoIterator<Item = (u32, usize)>>(iter: I) -> Self {
        FrequencyTable(iter.into_iter().filter(|&(_, n)| n > 0).collect())
    }
}

/// Categories covering at least `min_pixel_fraction` of the image (and at
/// least one pixel).
pub fn present_categories(clusters: &ClusterMap, min_pixel_fraction: f64) -> BTreeSet<u32> {
    let floor = min_pixel_fraction * clusters.labels().len() as f64;
    clusters.histogram().into_iter().filter(|&(_, n)| n as f64 >= floor).map(|(c, _)| c).collect()
}

pub fn category_frequency(bundle: &GroupBundle, min_pixel_fraction: f64) -> FrequencyTable {
    let mut counts = BTreeMap::new();
    for entry in bundle.entries() {
        for c in present_categories(&entry.clusters, min_pixel_fraction) {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    FrequencyTable(counts)
}

/// Categories sorted by descending frequency, then ascending id, truncated to `k`.
pub fn top_k_categories(image_categories: &BTreeSet<u32>, freq: &FrequencyTable, k: usize) -> Vec<u32> {
    let mut ranked: Vec<u32> = image_categories.iter().copied().collect();
    ranked.sort_by_key(|&c| (std::cmp::Reverse(freq.get(c)), c));
    ranked.truncate(k);
    ranked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMode {
    /// `|SM ∩ DM| / (H·W)`
    #[default]
    ImageArea,
    /// `|SM ∩ DM| / |SM|`, zero for an empty `SM`.
    MaskArea,
}

impl std::str::FromStr for OverlapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "image-area" => Ok(OverlapMode::ImageArea),
            "mask-area" => Ok(OverlapMode::MaskArea),
            other => Err(Error::InvalidConfig(format!("unknown overlap mode `{other}`"))),
        }
    }
}

/// What to emit when every candidate has zero overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    #[default]
    HighestFrequency,
    Skip,
}

impl std::str::FromStr for Fallback {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "highest-frequency" => Ok(Fallback::HighestFrequency),
            "skip" => Ok(Fallback::Skip),
            other => Err(Error::InvalidConfig(format!("unknown fallback `{other}`"))),
        }
    }
}

pub fn overlap_score(sm: &BinaryMask, dm: &BinaryMask, mode: OverlapMode) -> Result<f64> {
    let inter = sm.intersection_count(dm)?;
    let denominator = match mode {
        OverlapMode::ImageArea => sm.len(),
        OverlapMode::MaskArea => sm.count(),
    };
    Ok(if denominator == 0 { 0.0 } else { inter as f64 / denominator as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PseudoLabelConfig {
    pub top_k: usize,
    pub min_pixel_fraction: f64,
    pub overlap_mode: OverlapMode,
    pub fallback: Fallback,
}

impl Default for PseudoLabelConfig {
    fn default() -> Self {
        PseudoLabelConfig {
            top_k: 5,
            min_pixel_fraction: 0.001,
            overlap_mode: OverlapMode::ImageArea,
            fallback: Fallback::HighestFrequency,
        }
    }
}

impl PseudoLabelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_k == 0 {
            return Err(Error::InvalidConfig("top_k must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.min_pixel_fraction) {
            return Err(Error::InvalidConfig(format!(
                "min_pixel_fraction must lie in [0, 1), got {}",
                self.min_pixel_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub category: u32,
    pub frequency: usize,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageSelection {
    pub image_id: String,
    /// `None` when no category was emitted (skip fallback or no candidates).
    pub selected: Option<u32>,
    pub mask: BinaryMask,
    /// Candidates in rank order (frequency desc, id asc).
    pub candidates: Vec<Candidate>,
    pub fallback_used: bool,
    pub otsu_threshold: Option<u8>,
    pub foreground_pixels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabelResult {
    pub group: String,
    pub frequencies: FrequencyTable,
    pub images: Vec<ImageSelection>,
}

/// Candidate with the highest overlap. Candidates arrive in tie-break order,
/// so the first maximum is kept.
fn best_candidate(candidates: &[Candidate]) -> Option<&Candidate> {
    candidates.iter().fold(None, |best: Option<&Candidate>, c| match best {
        Some(b) if b.overlap >= c.overlap => Some(b),
        _ => Some(c),
    })
}

pub fn select_for_image(
    image_id: &str,
    attention: &AttentionStack,
    clusters: &ClusterMap,
    freq: &FrequencyTable,
    cfg: &PseudoLabelConfig,
) -> Result<ImageSelection> {
    let otsu = otsu_binarize(&average_attention(attention));
    let ranked = top_k_categories(&present_categories(clusters, cfg.min_pixel_fraction), freq, cfg.top_k);
    let candidates = ranked
        .iter()
        .map(|&category| {
            let overlap = overlap_score(&clusters.category_mask(category), &otsu.mask, cfg.overlap_mode)?;
            Ok(Candidate { category, frequency: freq.get(category), overlap })
        })
        .collect::<Result<Vec<_>>>()?;

    let winner = best_candidate(&candidates).filter(|c| c.overlap > 0.0).map(|c| c.category);
    let (selected, fallback_used) = match (winner, cfg.fallback) {
        (Some(c), _) => (Some(c), false),
        (None, Fallback::HighestFrequency) => (candidates.first().map(|c| c.category), true),
        (None, Fallback::Skip) => (None, true),
    };
    let mask = match selected {
        Some(c) => clusters.category_mask(c),
        None => otsu.mask.map(|_| false)?,
    };
    Ok(ImageSelection {
        image_id: image_id.to_string(),
        selected,
        mask,
        candidates,
        fallback_used,
        otsu_threshold: otsu.threshold,
        foreground_pixels: otsu.mask.count(),
    })
}

/// Runs the full selection over one group.
pub fn select_pseudo_masks(bundle: &GroupBundle, cfg: &PseudoLabelConfig) -> Result<PseudoLabelResult> {
    cfg.validate()?;
    let frequencies = category_frequency(bundle, cfg.min_pixel_fraction);
    let images = bundle
        .entries()
        .iter()
        .map(|e| select_for_image(&e.image_id, &e.attention, &e.clusters, &frequencies, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(PseudoLabelResult { group: bundle.name().to_string(), frequencies, images })
}

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyEntry {
    pub category: u32,
    pub images: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageReport {
    pub image_id: String,
    pub selected: Option<u32>,
    pub fallback_used: bool,
    pub otsu_threshold: Option<u8>,
    pub foreground_pixels: usize,
    pub mask_pixels: usize,
    pub candidates: Vec<Candidate>,
}

/// Serializable per-group summary written next to the masks.
#[derive(Debug, Clone, Serialize)]
pub struct GroupReport {
    pub group: String,
    pub config: PseudoLabelConfig,
    pub frequencies: Vec<FrequencyEntry>,
    pub images: Vec<ImageReport>,
}

impl PseudoLabelResult {
    pub fn report(&self, cfg: &PseudoLabelConfig) -> GroupReport {
        GroupReport {
            group: self.group.clone(),
            config: *cfg,
            frequencies: self
                .frequencies
                .iter()
                .map(|(category, images)| FrequencyEntry { category, images })
                .collect(),
            images: self
                .images
                .iter()
                .map(|s| ImageReport {
                    image_id: s.image_id.clone(),
                    selected: s.selected,
                    fallback_used: s.fallback_used,
                    otsu_threshold: s.otsu_threshold,
                    foreground_pixels: s.foreground_pixels,
                    mask_pixels: s.mask.count(),
                    candidates: s.candidates.clone(),
                })
                .collect(),
        }
    }
}
