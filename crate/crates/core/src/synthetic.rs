//! Seeded synthetic datasets in the on-disk group layout.
//!
//! Every image of a group shows one shared object (a disk) above a two-part
//! background: an upper "sky" region and a lower "floor" region. Both
//! background categories appear in every image, so they tie or beat the
//! object on co-occurrence frequency; only the attention foreground tells them
//! apart. The second image of each group also holds a smaller, moderately
//! salient distractor, and every image carries a single-pixel noise label.
//!
//! Background attention never reaches the object's range, so the Otsu
//! foreground of every image excludes both background categories.
//!
//! Attention values lie on a 1/256 grid, so affine rescaling with simple
//! constants is exact in `f32`.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::plane::{AttentionStack, BinaryMask, ClusterMap, FloatPlane, Plane};
use crate::tensor_io::{write_attention, write_clusters, write_mask_png, GroupBundle, GroupEntry};

pub const SKY: u32 = 0;
pub const FLOOR: u32 = 1;
pub const OBJECT: u32 = 5;
pub const DISTRACTOR: u32 = 7;
pub const NOISE: u32 = 9;

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub groups: Vec<String>,
    pub images_per_group: usize,
    pub height: usize,
    pub width: usize,
    pub n_heads: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// The committed fixture: 3 groups × 4 images of 32×32 with 3 heads.
    fn default() -> Self {
        SyntheticSpec {
            groups: vec!["alpha".into(), "bravo".into(), "charlie".into()],
            images_per_group: 4,
            height: 32,
            width: 32,
            n_heads: 3,
            seed: 7,
        }
    }
}

fn grid_value(rng: &mut ChaCha8Rng, lo: f32, hi: f32) -> f32 {
    let lo = (lo * 256.0) as u32;
    let hi = (hi * 256.0) as u32;
    rng.random_range(lo..hi) as f32 / 256.0
}

fn synth_image(
    rng: &mut ChaCha8Rng,
    spec: &SyntheticSpec,
    image_id: String,
    with_distractor: bool,
) -> Result<GroupEntry> {
    let (h, w) = (spec.height, spec.width);
    let short = h.min(w) as f64;
    let radius = rng.random_range(short * 0.16..short * 0.24);
    let cy = rng.random_range(radius + 1.0..h as f64 - radius - 1.0);
    let cx = rng.random_range(radius + 1.0..w as f64 - radius - 1.0);
    // The cluster boundary disagrees slightly with the annotated object.
    let cluster_radius = radius + rng.random_range(-1.0..1.0);
    let floor_row = rng.random_range(h * 5 / 8..h * 7 / 8);

    let inside = |r: usize, c: usize, rad: f64| {
        let (dy, dx) = (r as f64 + 0.5 - cy, c as f64 + 0.5 - cx);
        dy * dy + dx * dx <= rad * rad
    };

    let side = (short * 0.15).max(2.0) as usize;
    let distractor = with_distractor.then(|| {
        // Corner farthest from the object.
        let top = if cy > h as f64 / 2.0 { 1 } else { h - side - 1 };
        let left = if cx > w as f64 / 2.0 { 1 } else { w - side - 1 };
        (top, left)
    });
    let in_distractor =
        |r: usize, c: usize| distractor.is_some_and(|(t, l)| (t..t + side).contains(&r) && (l..l + side).contains(&c));

    let mut labels = Plane::from_fn(h, w, |r, c| {
        if inside(r, c, cluster_radius) {
            OBJECT
        } else if in_distractor(r, c) {
            DISTRACTOR
        } else if r >= floor_row {
            FLOOR
        } else {
            SKY
        }
    })?
    .into_vec();
    let ground_truth = Plane::from_fn(h, w, |r, c| inside(r, c, radius))?;

    loop {
        let idx = rng.random_range(0..h * w);
        if labels[idx] == SKY || labels[idx] == FLOOR {
            labels[idx] = NOISE;
            break;
        }
    }

    let mut heads = Vec::with_capacity(spec.n_heads);
    for _ in 0..spec.n_heads {
        let data = (0..h * w)
            .map(|i| {
                let (r, c) = (i / w, i % w);
                if inside(r, c, cluster_radius) {
                    grid_value(rng, 0.6, 1.0)
                } else if in_distractor(r, c) {
                    grid_value(rng, 0.45, 0.75)
                } else if r >= floor_row {
                    grid_value(rng, 0.05, 0.2)
                } else {
                    grid_value(rng, 0.0, 0.15)
                }
            })
            .collect();
        heads.push(FloatPlane::new(h, w, data)?);
    }

    Ok(GroupEntry {
        image_id,
        attention: AttentionStack::new(heads)?,
        clusters: ClusterMap::new(Plane::new(h, w, labels)?),
        ground_truth: Some(ground_truth),
    })
}

/// Builds every group of `spec` in memory, in order.
pub fn generate(spec: &SyntheticSpec) -> Result<Vec<GroupBundle>> {
    if spec.images_per_group == 0 || spec.n_heads == 0 || spec.height < 16 || spec.width < 16 {
        return Err(Error::InvalidConfig("synthetic groups need images, heads and at least 16×16 planes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    spec.groups
        .iter()
        .map(|name| {
            let entries = (0..spec.images_per_group)
                .map(|i| synth_image(&mut rng, spec, format!("img_{i:02}"), i == 1))
                .collect::<Result<Vec<_>>>()?;
            GroupBundle::new(name.clone(), entries)
        })
        .collect()
}

/// Writes groups in the dataset layout under `root`.
pub fn write_dataset(root: impl AsRef<Path>, groups: &[GroupBundle]) -> Result<()> {
    let root = root.as_ref();
    for group in groups {
        let dir = root.join(group.name());
        fs::create_dir_all(&dir).map_err(Error::io(&dir))?;
        for e in group.entries() {
            write_attention(&e.attention, dir.join(format!("{}.attn.plane", e.image_id)))?;
            write_clusters(&e.clusters, dir.join(format!("{}.clus.plane", e.image_id)))?;
            if let Some(gt) = &e.ground_truth {
                write_mask_png(gt, dir.join(format!("{}.gt.png", e.image_id)))?;
            }
        }
    }
    Ok(())
}

/// Ground-truth masks of a group, panicking if any is missing.
pub fn ground_truths(group: &GroupBundle) -> Vec<BinaryMask> {
    group.entries().iter().map(|e| e.ground_truth.clone().expect("synthetic entries carry ground truth")).collect()
}
