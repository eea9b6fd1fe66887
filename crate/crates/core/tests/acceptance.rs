//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the terminal.
//! Criteria listed in `KNOWN_RED` are expected to fail; the target itself
//! fails if any other criterion fails or a known-red one starts passing.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use cosod::harness::{run_pseudolabel, RunConfig};
use cosod::losses::{
    ema_update, iou_loss, normalize_confidence, supervised_loss, total_loss, unsupervised_loss, ParamVector, IOU_EPS,
};
use cosod::metrics::{emeasure_max, evaluate, fbeta_max, mae, smeasure, MetricConfig};
use cosod::pseudolabel::{average_attention, otsu_binarize, select_pseudo_masks, PseudoLabelConfig, SaliencyMap};
use cosod::synthetic::{generate, write_dataset, SyntheticSpec, FLOOR, OBJECT, SKY};
use cosod::tensor_io::{GroupBundle, GroupEntry};
use cosod::{AttentionStack, BinaryMask, FloatPlane, Plane};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_RED: &[&str] = &["loss-kernel identities"];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(limit: Duration, started: Instant) -> Result<Duration, String> {
    let took = started.elapsed();
    if took > limit {
        Err(format!("took {took:.2?}, limit {limit:?}"))
    } else {
        Ok(took)
    }
}

// ---------------------------------------------------------------- oracles

fn level(v: f32) -> u64 {
    (v as f64 * 255.0).round() as u64
}

/// Exhaustive Otsu: every threshold, class statistics rescanned from pixels,
/// variance compared as exact fractions. Returns `(threshold, mask)`.
fn otsu_oracle(values: &[f32]) -> (Option<u8>, Vec<bool>) {
    let levels: Vec<u64> = values.iter().map(|&v| level(v)).collect();
    let mut best: Option<(u8, u128, u128)> = None;
    for t in 0..=255u64 {
        let (mut w0, mut s0, mut w1, mut s1) = (0u128, 0u128, 0u128, 0u128);
        for &l in &levels {
            if l <= t {
                w0 += 1;
                s0 += l as u128;
            } else {
                w1 += 1;
                s1 += l as u128;
            }
        }
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let d = (s0 * w1).abs_diff(s1 * w0);
        let (num, den) = (d * d, w0 * w1);
        if best.is_none_or(|(_, bn, bd)| num * bd > bn * den) {
            best = Some((t as u8, num, den));
        }
    }
    let t = best.map(|(t, _, _)| t);
    let mask = levels.iter().map(|&l| t.is_some_and(|t| l > t as u64)).collect();
    (t, mask)
}

fn head_average_oracle(stack: &AttentionStack) -> Vec<f32> {
    let n = stack.heads()[0].len();
    let sums: Vec<f64> = (0..n).map(|i| stack.heads().iter().map(|h| h.as_slice()[i] as f64).sum()).collect();
    let lo = sums.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    sums.iter().map(|&s| if hi > lo { ((s - lo) / (hi - lo)) as f32 } else { 0.0 }).collect()
}

struct Counts {
    tp: f64,
    fp: f64,
    fn_: f64,
    n: f64,
}

fn binarize(pred: &[f64], gt: &[bool], k: usize) -> (Vec<f64>, Counts) {
    let t = k as f64 / 255.0;
    let s: Vec<f64> = pred.iter().map(|&p| if p > t { 1.0 } else { 0.0 }).collect();
    let mut c = Counts { tp: 0.0, fp: 0.0, fn_: 0.0, n: pred.len() as f64 };
    for (&si, &g) in s.iter().zip(gt) {
        match (si == 1.0, g) {
            (true, true) => c.tp += 1.0,
            (true, false) => c.fp += 1.0,
            (false, true) => c.fn_ += 1.0,
            _ => {}
        }
    }
    (s, c)
}

fn fbeta_oracle(pred: &[f64], gt: &[bool], beta2: f64) -> f64 {
    (0..256)
        .map(|k| {
            let (_, c) = binarize(pred, gt, k);
            if c.tp + c.fn_ == 0.0 {
                return if c.fp == 0.0 { 1.0 } else { 0.0 };
            }
            let p = if c.tp + c.fp > 0.0 { c.tp / (c.tp + c.fp) } else { 0.0 };
            let r = c.tp / (c.tp + c.fn_);
            if p + r == 0.0 {
                0.0
            } else {
                (1.0 + beta2) * p * r / (beta2 * p + r)
            }
        })
        .fold(0.0, f64::max)
}

fn emeasure_oracle(pred: &[f64], gt: &[bool]) -> f64 {
    (0..256)
        .map(|k| {
            let (s, c) = binarize(pred, gt, k);
            let g: Vec<f64> = gt.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            let ms = s.iter().sum::<f64>() / c.n;
            let mg = g.iter().sum::<f64>() / c.n;
            if mg == 0.0 {
                return 1.0 - ms;
            }
            if mg == 1.0 {
                return ms;
            }
            s.iter()
                .zip(&g)
                .map(|(si, gi)| {
                    let (a, b) = (si - ms, gi - mg);
                    let phi = if a * a + b * b == 0.0 { 0.0 } else { 2.0 * a * b / (a * a + b * b) };
                    (1.0 + phi).powi(2) / 4.0
                })
                .sum::<f64>()
                / c.n
        })
        .fold(0.0, f64::max)
}

fn mae_oracle(pred: &[f64], gt: &[bool]) -> f64 {
    pred.iter().zip(gt).map(|(p, &g)| (p - if g { 1.0 } else { 0.0 }).abs()).sum::<f64>() / pred.len() as f64
}

/// Straight-line S-measure over row-major 2-D arrays.
#[allow(clippy::needless_range_loop)]
fn smeasure_oracle(pred: &[Vec<f64>], gt: &[Vec<bool>], alpha: f64, lambda: f64) -> f64 {
    let (h, w) = (pred.len(), pred[0].len());
    let n = (h * w) as f64;
    let g: Vec<Vec<f64>> = gt.iter().map(|row| row.iter().map(|&b| f64::from(u8::from(b))).collect()).collect();
    let gsum: f64 = g.iter().flatten().sum();
    let psum: f64 = pred.iter().flatten().sum();
    if gsum == 0.0 {
        return 1.0 - psum / n;
    }
    if gsum == n {
        return psum / n;
    }

    let similarity = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let sd = if v.len() > 1 {
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        2.0 * m / (m * m + 1.0 + 2.0 * lambda * sd)
    };
    let mut fg = vec![];
    let mut bg = vec![];
    for r in 0..h {
        for c in 0..w {
            if gt[r][c] {
                fg.push(pred[r][c]);
            } else {
                bg.push(1.0 - pred[r][c]);
            }
        }
    }
    let u = gsum / n;
    let object = u * similarity(&fg) + (1.0 - u) * similarity(&bg);

    let (mut ry, mut rx) = (0.0, 0.0);
    for r in 0..h {
        for c in 0..w {
            ry += r as f64 * g[r][c];
            rx += c as f64 * g[r][c];
        }
    }
    let y = ((ry / gsum).round_ties_even() as usize + 1).min(h);
    let x = ((rx / gsum).round_ties_even() as usize + 1).min(w);
    let block = |rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| {
        let mut a = vec![];
        let mut b = vec![];
        for r in rows {
            for c in cols.clone() {
                a.push(pred[r][c]);
                b.push(g[r][c]);
            }
        }
        let k = a.len();
        if k == 0 {
            return 0.0;
        }
        let ma = a.iter().sum::<f64>() / k as f64;
        let mb = b.iter().sum::<f64>() / k as f64;
        let d = if k > 1 { (k - 1) as f64 } else { f64::INFINITY };
        let va = a.iter().map(|v| (v - ma).powi(2)).sum::<f64>() / d;
        let vb = b.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / d;
        let cov = a.iter().zip(&b).map(|(p, q)| (p - ma) * (q - mb)).sum::<f64>() / d;
        let num = 4.0 * ma * mb * cov;
        let den = (ma * ma + mb * mb) * (va + vb);
        let q = if num != 0.0 {
            num / den
        } else if den == 0.0 {
            1.0
        } else {
            0.0
        };
        k as f64 / n * q
    };
    let region = block(0..y, 0..x) + block(0..y, x..w) + block(y..h, 0..x) + block(y..h, x..w);
    (alpha * object + (1.0 - alpha) * region).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------- inputs

fn random_unit_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f32> {
    match rng.random_range(0..5) {
        0 => (0..n).map(|_| rng.random_range(0.0f32..=1.0)).collect(),
        1 => {
            let palette: Vec<f32> = (0..rng.random_range(1..5)).map(|_| rng.random_range(0.0f32..=1.0)).collect();
            (0..n).map(|_| palette[rng.random_range(0..palette.len())]).collect()
        }
        2 => (0..n).map(|_| rng.random_range(0..=255u32) as f32 / 255.0).collect(),
        3 => (0..n).map(|_| (rng.random_range(0..255u32) as f32 + 0.5) / 255.0).collect(),
        _ => (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect(),
    }
}

fn random_mask(rng: &mut ChaCha8Rng, h: usize, w: usize) -> BinaryMask {
    let data = match rng.random_range(0..6) {
        0 => vec![false; h * w],
        1 => vec![true; h * w],
        _ => {
            let p = rng.random_range(0.05..0.95);
            (0..h * w).map(|_| rng.random_bool(p)).collect()
        }
    };
    Plane::new(h, w, data).unwrap()
}

fn rows<T: Copy>(data: &[T], w: usize) -> Vec<Vec<T>> {
    data.chunks(w).map(<[T]>::to_vec).collect()
}

// ---------------------------------------------------------------- criteria

fn background_rejection() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().join("dataset");
    let groups = generate(&SyntheticSpec { seed: 2024, ..Default::default() }).map_err(|e| e.to_string())?;
    write_dataset(&root, &groups).map_err(|e| e.to_string())?;

    let mut images = 0;
    for group in &groups {
        for e in group.entries() {
            images += 1;
            let (_, fg) = otsu_oracle(&head_average_oracle(&e.attention));
            for bg in [SKY, FLOOR] {
                let labels = e.clusters.labels().as_slice();
                if !labels.contains(&bg) {
                    return Err(format!("{}/{}: background {bg} absent", group.name(), e.image_id));
                }
                if labels.iter().zip(&fg).any(|(&l, &f)| l == bg && f) {
                    return Err(format!("{}/{}: background {bg} touches the foreground", group.name(), e.image_id));
                }
            }
        }
    }

    let out = dir.path().join("out");
    let started = Instant::now();
    let res = cosod(&["pseudolabel", "--root", path_str(&root), "--out", path_str(&out)]);
    let took = within(Duration::from_secs(1), started)?;
    if !res.status.success() {
        return Err(stderr(&res));
    }
    let mut hits = 0;
    for group in &groups {
        let text = std::fs::read_to_string(out.join("reports").join(format!("{}.json", group.name())))
            .map_err(|e| e.to_string())?;
        let report: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        for img in report["images"].as_array().unwrap() {
            if img["selected"] == OBJECT {
                hits += 1;
            }
        }
    }
    if hits != images {
        return Err(format!("foreground selected in {hits}/{images} images"));
    }
    Ok(format!("foreground selected in {hits}/{images} images, backgrounds in 100% of images, {took:.2?}"))
}

fn otsu_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let started = Instant::now();
    let mut degenerate = 0;
    for case in 0..1000 {
        let (h, w) = (rng.random_range(1..=32), rng.random_range(1..=32));
        let values = random_unit_values(&mut rng, h * w);
        let (t, mask) = otsu_oracle(&values);
        let got = otsu_binarize(&SaliencyMap::new(FloatPlane::new(h, w, values).unwrap()).unwrap());
        if got.threshold != t || got.mask.as_slice() != mask.as_slice() {
            return Err(format!("case {case} ({h}x{w}): threshold {:?} vs oracle {t:?}", got.threshold));
        }
        degenerate += usize::from(t.is_none());
    }
    let took = within(Duration::from_secs(5), started)?;
    Ok(format!("1000/1000 maps identical ({degenerate} degenerate), {took:.2?}"))
}

fn metric_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = MetricConfig::default();
    let started = Instant::now();
    let (mut worst_f, mut worst_e, mut worst_m, mut worst_s) = (0f64, 0f64, 0f64, 0f64);
    for case in 0..500 {
        let (h, w) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let pred = FloatPlane::new(h, w, random_unit_values(&mut rng, h * w)).unwrap();
        let gt = random_mask(&mut rng, h, w);
        let p: Vec<f64> = pred.as_slice().iter().map(|&v| v as f64).collect();
        let g = gt.as_slice();

        let df = (fbeta_max(&pred, &gt, &cfg).unwrap() - fbeta_oracle(&p, g, cfg.beta2)).abs();
        let de = (emeasure_max(&pred, &gt).unwrap() - emeasure_oracle(&p, g)).abs();
        let dm = (mae(&pred, &gt).unwrap() - mae_oracle(&p, g)).abs();
        let ds = (smeasure(&pred, &gt, &cfg).unwrap()
            - smeasure_oracle(&rows(&p, w), &rows(g, w), cfg.alpha, cfg.lambda))
        .abs();
        if df > 1e-9 || de > 1e-9 || dm > 1e-12 || ds > 1e-9 {
            return Err(format!("case {case} ({h}x{w}): |dF| {df:.1e} |dE| {de:.1e} |dMAE| {dm:.1e} |dS| {ds:.1e}"));
        }
        worst_f = worst_f.max(df);
        worst_e = worst_e.max(de);
        worst_m = worst_m.max(dm);
        worst_s = worst_s.max(ds);
    }
    let took = within(Duration::from_secs(10), started)?;
    Ok(format!(
        "500 pairs; max |dF| {worst_f:.1e}, |dE| {worst_e:.1e}, |dMAE| {worst_m:.1e}, |dS| {worst_s:.1e}, {took:.2?}"
    ))
}

fn perfect_predictions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = MetricConfig::default();
    for case in 0..100 {
        let (h, w) = (rng.random_range(1..=32), rng.random_range(1..=32));
        let gt = random_mask(&mut rng, h, w);
        let r = evaluate(&gt.to_float(), &gt, &cfg).unwrap();
        if (r.mae, r.fbeta_max, r.emeasure_max, r.smeasure) != (0.0, 1.0, 1.0, 1.0) {
            return Err(format!(
                "case {case} ({h}x{w}, {} fg): MAE {} F {} E {} S {}",
                gt.count(),
                r.mae,
                r.fbeta_max,
                r.emeasure_max,
                r.smeasure
            ));
        }
    }
    Ok("100/100 masks give MAE 0, F 1, E 1, S 1 exactly".into())
}

fn loss_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();

    let (mut worst_soft, mut worst_hard) = (0f64, 0f64);
    for _ in 0..500 {
        let (h, w) = (rng.random_range(1..=16), rng.random_range(1..=16));
        let soft = FloatPlane::new(h, w, (0..h * w).map(|_| rng.random_range(0.0f32..=1.0)).collect()).unwrap();
        worst_soft = worst_soft.max(iou_loss(&soft, &soft).unwrap());
        let hard = random_mask(&mut rng, h, w).to_float();
        worst_hard = worst_hard.max(iou_loss(&hard, &hard).unwrap());
    }
    let bound = 2.0 * IOU_EPS;
    let iou_note = format!("iou(p,p) max {worst_soft:.3} on soft p, {worst_hard:.1e} on 0/1 p (bound {bound:.0e})");
    if worst_soft > bound || worst_hard > bound {
        failures.push("iou self-loss");
    }

    let mut worst_sum = 0f64;
    let mut worst_scale = 0f64;
    for _ in 0..500 {
        let raw: Vec<f64> = (0..rng.random_range(1..=16)).map(|_| rng.random_range(0.0..1.0)).collect();
        let base = normalize_confidence(&raw).unwrap();
        worst_sum = worst_sum.max((base.weights().iter().sum::<f64>() - 1.0).abs());
        for c in [1e-3, 0.5, 7.0, 1e4] {
            let scaled: Vec<f64> = raw.iter().map(|v| v * c).collect();
            let other = normalize_confidence(&scaled).unwrap();
            for (a, b) in base.weights().iter().zip(other.weights()) {
                worst_scale = worst_scale.max((a - b).abs());
            }
        }
    }
    if worst_sum > 1e-9 || worst_scale > 1e-9 {
        failures.push("confidence normalization");
    }

    let mut worst_ema = 0f64;
    for _ in 0..50 {
        let dim = rng.random_range(1..=64);
        let student = ParamVector::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let mut teacher = ParamVector::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let gap0 = teacher.max_abs_diff(&student).unwrap();
        for k in 1..=30 {
            teacher = ema_update(&teacher, &student, 0.95).unwrap();
            let gap = teacher.max_abs_diff(&student).unwrap();
            worst_ema = worst_ema.max((gap - 0.95f64.powi(k) * gap0).abs());
        }
    }
    if worst_ema > 1e-9 {
        failures.push("EMA decay");
    }

    // 2×2 fixtures with hand-computed soft-IoU sums.
    let plane = |v: [f32; 4]| FloatPlane::new(2, 2, v.to_vec()).unwrap();
    let mask = |v: [bool; 4]| BinaryMask::new(2, 2, v.to_vec()).unwrap();
    let e = IOU_EPS;
    let preds = [plane([1.0, 1.0, 0.0, 0.0]), plane([0.5, 0.5, 0.5, 0.5])];
    let gts = [mask([true, false, false, false]), mask([true, true, false, false])];
    let sup = supervised_loss(&preds, &gts, &[1.0, 0.5], 0.1).unwrap();
    let iou_a = 1.0 - (1.0 + e) / (2.0 + e);
    let iou_b = 1.0 - (1.0 + e) / (3.0 + e);
    let sup_hand = (iou_a + iou_b) / 2.0 + 0.1 * (1.0 + 0.5) / 2.0;
    let student = [plane([1.0, 0.0, 0.0, 0.0]), plane([0.0, 0.0, 1.0, 1.0])];
    let teacher = [plane([1.0, 1.0, 0.0, 0.0]), plane([0.0, 0.0, 1.0, 1.0])];
    let unsup = unsupervised_loss(&student, &teacher, &normalize_confidence(&[3.0, 1.0]).unwrap()).unwrap();
    let unsup_hand = (0.75 * (1.0 - (1.0 + e) / (2.0 + e)) + 0.25 * 0.0) / 2.0;
    let total = total_loss(sup, unsup, 1.0);
    let total_hand = sup_hand + unsup_hand;
    if (total - total_hand).abs() > 1e-12 {
        failures.push("total loss");
    }

    let summary = format!(
        "{iou_note}; weights |sum-1| {worst_sum:.1e}, scale drift {worst_scale:.1e}; EMA gap error {worst_ema:.1e}; total {total:.9} = hand {total_hand:.9}"
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("violated [{}]; {summary}", failures.join(", ")))
    }
}

fn rescale(bundle: &GroupBundle, a: f32, b: f32) -> GroupBundle {
    let entries = bundle
        .entries()
        .iter()
        .map(|e| GroupEntry {
            attention: AttentionStack::new(e.attention.heads().iter().map(|h| h.map(|v| a * v + b).unwrap()).collect())
                .unwrap(),
            ..e.clone()
        })
        .collect();
    GroupBundle::new(bundle.name(), entries).unwrap()
}

fn relabel(bundle: &GroupBundle, perm: &[u32]) -> GroupBundle {
    let entries = bundle
        .entries()
        .iter()
        .map(|e| GroupEntry { clusters: e.clusters.relabel(|l| perm[l as usize]), ..e.clone() })
        .collect();
    GroupBundle::new(bundle.name(), entries).unwrap()
}

fn invariance() -> Outcome {
    let spec = SyntheticSpec {
        groups: (0..6).map(|i| format!("g{i}")).collect(),
        images_per_group: 5,
        seed: 99,
        ..Default::default()
    };
    let groups = generate(&spec).map_err(|e| e.to_string())?;
    let cfg = PseudoLabelConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for group in &groups {
        let base = select_pseudo_masks(group, &cfg).unwrap();
        for (a, b) in [(2.0, 0.0), (0.5, 0.25), (4.0, -1.5), (0.25, 3.0)] {
            let scaled = rescale(group, a, b);
            let other = select_pseudo_masks(&scaled, &cfg).unwrap();
            for ((x, y), e) in base.images.iter().zip(&other.images).zip(scaled.entries()) {
                let dm_x = otsu_binarize(&average_attention(
                    &group.entries().iter().find(|g| g.image_id == x.image_id).unwrap().attention,
                ));
                let dm_y = otsu_binarize(&average_attention(&e.attention));
                if dm_x.mask != dm_y.mask || x.selected != y.selected || x.mask != y.mask {
                    return Err(format!("{}/{}: attention {a}*v+{b} changed the outcome", group.name(), x.image_id));
                }
                checked += 1;
            }
        }
        let mut perm: Vec<u32> = (0..16).collect();
        perm.shuffle(&mut rng);
        let other = select_pseudo_masks(&relabel(group, &perm), &cfg).unwrap();
        for (x, y) in base.images.iter().zip(&other.images) {
            if x.selected.map(|c| perm[c as usize]) != y.selected || x.mask != y.mask {
                return Err(format!("{}/{}: label permutation did not carry over", group.name(), x.image_id));
            }
            checked += 1;
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().join("dataset");
    write_dataset(&root, &groups).map_err(|e| e.to_string())?;
    let run = |jobs: &str| {
        let out = dir.path().join(format!("jobs{jobs}"));
        let res = cosod(&["pseudolabel", "--jobs", jobs, "--root", path_str(&root), "--out", path_str(&out)]);
        if res.status.success() {
            Ok(out)
        } else {
            Err(stderr(&res))
        }
    };
    let (one, eight) = (run("1")?, run("8")?);
    let diffs = tree_diff(&one, &eight);
    if !diffs.is_empty() {
        return Err(format!("--jobs 1 vs 8: {diffs:?}"));
    }
    Ok(format!(
        "{checked} rescaled/relabelled selections unchanged; --jobs 1 vs 8 byte-identical over {} files",
        files_under(&one).len()
    ))
}

fn golden() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let cfg = RunConfig { root: Some(fixture_root()), out: Some(out.clone()), ..Default::default() };
        run_pseudolabel(&cfg).map_err(|e| e.to_string())?;
        let diffs = tree_diff(&golden_root(), &out);
        if !diffs.is_empty() {
            return Err(format!("run {run}: {diffs:?}"));
        }
        files = files_under(&out).len();
    }
    Ok(format!("{files} files byte-identical to {} on two runs", relative(&golden_root())))
}

fn relative(p: &Path) -> String {
    p.strip_prefix(manifest_dir()).unwrap_or(p).display().to_string()
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("background rejection", background_rejection),
        ("otsu oracle equivalence", otsu_equivalence),
        ("metric oracle equivalence", metric_equivalence),
        ("perfect-prediction fixed points", perfect_predictions),
        ("loss-kernel identities", loss_identities),
        ("invariance suite", invariance),
        ("golden end-to-end run", golden),
    ];

    let mut unexpected = Vec::new();
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let known_red = KNOWN_RED.contains(&name);
        match &outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => println!("FAIL  {name}: {detail}{}", if known_red { "  [known red]" } else { "" }),
        }
        if outcome.is_ok() == known_red {
            unexpected.push(name);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected outcome: {unexpected:?}");
        std::process::exit(1);
    }
}
