//! Structure measure: object-aware plus region-aware similarity.

use super::{check, MetricConfig};
use crate::error::Result;
use crate::plane::{BinaryMask, FloatPlane};

/// Mean and sample standard deviation (zero below two samples).
fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (count, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    if count == 0 {
        return (0.0, 0.0);
    }
    let mean = sum / count as f64;
    if count < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (count - 1) as f64).sqrt())
}

fn object_similarity(values: impl Iterator<Item = f64> + Clone, lambda: f64) -> f64 {
    let (mean, std) = mean_std(values);
    2.0 * mean / (mean * mean + 1.0 + 2.0 * lambda * std)
}

fn object_score(pred: &[f64], gt: &[bool], fg_ratio: f64, lambda: f64) -> f64 {
    let fg = pred.iter().zip(gt).filter(|(_, &g)| g).map(|(&p, _)| p);
    let bg = pred.iter().zip(gt).filter(|(_, &g)| !g).map(|(&p, _)| 1.0 - p);
    fg_ratio * object_similarity(fg, lambda) + (1.0 - fg_ratio) * object_similarity(bg, lambda)
}

/// Split point `(row, col)`: rounded foreground centroid plus one.
fn centroid_split(gt: &BinaryMask) -> (usize, usize) {
    let (mut rows, mut cols, mut n) = (0.0, 0.0, 0usize);
    for r in 0..gt.height() {
        for c in 0..gt.width() {
            if gt.get(r, c) {
                rows += r as f64;
                cols += c as f64;
                n += 1;
            }
        }
    }
    if n == 0 {
        return (
            (gt.height() as f64 / 2.0).round_ties_even() as usize,
            (gt.width() as f64 / 2.0).round_ties_even() as usize,
        );
    }
    let row = (rows / n as f64).round_ties_even() as usize + 1;
    let col = (cols / n as f64).round_ties_even() as usize + 1;
    (row, col)
}

/// SSIM-style similarity of one block.
fn block_ssim(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    if n > 1 {
        for (a, b) in x.iter().zip(y) {
            let (dx, dy) = (a - mx, b - my);
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
        let d = (n - 1) as f64;
        sxx /= d;
        syy /= d;
        sxy /= d;
    }
    let num = 4.0 * mx * my * sxy;
    let den = (mx * mx + my * my) * (sxx + syy);
    if num != 0.0 {
        num / den
    } else if den == 0.0 {
        1.0
    } else {
        0.0
    }
}

fn region_score(pred: &FloatPlane, gt: &BinaryMask) -> f64 {
    let (h, w) = gt.dims();
    let (split_r, split_c) = centroid_split(gt);
    let (split_r, split_c) = (split_r.min(h), split_c.min(w));
    let blocks =
        [(0, split_r, 0, split_c), (0, split_r, split_c, w), (split_r, h, 0, split_c), (split_r, h, split_c, w)];
    let mut weighted = 0.0;
    for (r0, r1, c0, c1) in blocks {
        let area = (r1 - r0) * (c1 - c0);
        if area == 0 {
            continue;
        }
        let mut x = Vec::with_capacity(area);
        let mut y = Vec::with_capacity(area);
        for r in r0..r1 {
            for c in c0..c1 {
                x.push(pred.get(r, c) as f64);
                y.push(if gt.get(r, c) { 1.0 } else { 0.0 });
            }
        }
        weighted += area as f64 * block_ssim(&x, &y);
    }
    weighted / (h * w) as f64
}

/// S-measure in `[0, 1]`. An empty ground truth scores `1 − mean(pred)`,
/// a full one `mean(pred)`.
pub fn smeasure(pred: &FloatPlane, gt: &BinaryMask, cfg: &MetricConfig) -> Result<f64> {
    check(pred, gt)?;
    let n = pred.len() as f64;
    let values: Vec<f64> = pred.as_slice().iter().map(|&v| v as f64).collect();
    let fg = gt.count();
    let pred_mean = values.iter().sum::<f64>() / n;
    if fg == 0 {
        return Ok(1.0 - pred_mean);
    }
    if fg == gt.len() {
        return Ok(pred_mean);
    }
    let fg_ratio = fg as f64 / n;
    let object = object_score(&values, gt.as_slice(), fg_ratio, cfg.lambda);
    let region = region_score(pred, gt);
    Ok((cfg.alpha * object + (1.0 - cfg.alpha) * region).clamp(0.0, 1.0))
}
