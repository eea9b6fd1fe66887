//! Saliency evaluation measures: MAE, max F-measure, max E-measure and
//! S-measure.
//!
//! Threshold sweeps use the 256 thresholds `k / 255` for `k` in `0..=255`;
//! a prediction pixel is foreground at threshold `T` when `pred > T`.

mod structure;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::{BinaryMask, FloatPlane};

pub use structure::smeasure;

pub const THRESHOLDS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    /// F-measure precision weight β².
    pub beta2: f64,
    /// S-measure object/region balance.
    pub alpha: f64,
    /// Dispersion weight inside the S-measure object term.
    pub lambda: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { beta2: 0.3, alpha: 0.5, lambda: 1.0 }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta2.is_finite() && self.beta2 > 0.0) {
            return Err(Error::InvalidConfig(format!("beta2 must be positive, got {}", self.beta2)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidConfig(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// The `k`-th sweep threshold.
pub fn threshold(k: usize) -> f64 {
    k as f64 / 255.0
}

/// Number of sweep thresholds a value exceeds; the pixel is foreground at
/// threshold `k` iff `k < exceeded_thresholds(v)`.
fn exceeded_thresholds(v: f32) -> usize {
    let v = v as f64;
    let mut m = (v * 255.0).ceil().clamp(0.0, THRESHOLDS as f64) as usize;
    while m > 0 && v <= threshold(m - 1) {
        m -= 1;
    }
    while m < THRESHOLDS && v > threshold(m) {
        m += 1;
    }
    m
}

/// Confusion counts at one threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    /// F-measure at this threshold. With an empty ground truth it is 1 when
    /// nothing is predicted and 0 otherwise.
    pub fn fbeta(&self, beta2: f64) -> f64 {
        if self.tp + self.fn_ == 0 {
            return if self.fp == 0 { 1.0 } else { 0.0 };
        }
        if self.tp == 0 {
            return 0.0;
        }
        let (p, r) = (self.precision(), self.recall());
        (1.0 + beta2) * p * r / (beta2 * p + r)
    }

    /// Enhanced-alignment measure of the binarized prediction.
    pub fn emeasure(&self) -> f64 {
        let n = self.total() as f64;
        let gt_fg = self.tp + self.fn_;
        let pred_fg = (self.tp + self.fp) as f64;
        if gt_fg == 0 {
            return 1.0 - pred_fg / n;
        }
        if gt_fg == self.total() {
            return pred_fg / n;
        }
        let mean_s = pred_fg / n;
        let mean_g = gt_fg as f64 / n;
        let score = |s: f64, g: f64| enhanced_alignment(s - mean_s, g - mean_g);
        let sum = self.tp as f64 * score(1.0, 1.0)
            + self.fp as f64 * score(1.0, 0.0)
            + self.fn_ as f64 * score(0.0, 1.0)
            + self.tn as f64 * score(0.0, 0.0);
        sum / n
    }
}

/// `(1 + φ)² / 4` with `φ = 2ab / (a² + b²)`, zero alignment when both
/// bias terms vanish.
pub(crate) fn enhanced_alignment(a: f64, b: f64) -> f64 {
    let denom = a * a + b * b;
    let phi = if denom == 0.0 { 0.0 } else { 2.0 * a * b / denom };
    (1.0 + phi) * (1.0 + phi) / 4.0
}

fn check(pred: &FloatPlane, gt: &BinaryMask) -> Result<()> {
    pred.ensure_same_dims(gt, "prediction vs ground truth")?;
    pred.ensure_unit_range()
}

/// Confusion counts at every sweep threshold.
pub fn threshold_sweep(pred: &FloatPlane, gt: &BinaryMask) -> Result<Vec<Confusion>> {
    check(pred, gt)?;
    let mut fg_hist = [0u64; THRESHOLDS + 1];
    let mut bg_hist = [0u64; THRESHOLDS + 1];
    for (&p, &g) in pred.as_slice().iter().zip(gt.as_slice()) {
        let m = exceeded_thresholds(p);
        if g {
            fg_hist[m] += 1;
        } else {
            bg_hist[m] += 1;
        }
    }
    let fg_total: u64 = fg_hist.iter().sum();
    let bg_total: u64 = bg_hist.iter().sum();
    // Pixels with m > k are foreground at threshold k.
    let mut out = vec![Confusion::default(); THRESHOLDS];
    let (mut tp, mut fp) = (0u64, 0u64);
    for k in (0..THRESHOLDS).rev() {
        tp += fg_hist[k + 1];
        fp += bg_hist[k + 1];
        out[k] = Confusion { tp, fp, fn_: fg_total - tp, tn: bg_total - fp };
    }
    Ok(out)
}

pub fn mae(pred: &FloatPlane, gt: &BinaryMask) -> Result<f64> {
    check(pred, gt)?;
    let sum: f64 =
        pred.as_slice().iter().zip(gt.as_slice()).map(|(&p, &g)| (p as f64 - if g { 1.0 } else { 0.0 }).abs()).sum();
    Ok(sum / pred.len() as f64)
}

pub fn fbeta_max(pred: &FloatPlane, gt: &BinaryMask, cfg: &MetricConfig) -> Result<f64> {
    Ok(threshold_sweep(pred, gt)?.iter().map(|c| c.fbeta(cfg.beta2)).fold(0.0, f64::max))
}

pub fn emeasure_max(pred: &FloatPlane, gt: &BinaryMask) -> Result<f64> {
    Ok(threshold_sweep(pred, gt)?.iter().map(Confusion::emeasure).fold(0.0, f64::max))
}

/// All four measures of one prediction plus its precision/recall curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub mae: f64,
    pub fbeta_max: f64,
    pub emeasure_max: f64,
    pub smeasure: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

pub fn evaluate(pred: &FloatPlane, gt: &BinaryMask, cfg: &MetricConfig) -> Result<MetricReport> {
    let sweep = threshold_sweep(pred, gt)?;
    Ok(MetricReport {
        mae: mae(pred, gt)?,
        fbeta_max: sweep.iter().map(|c| c.fbeta(cfg.beta2)).fold(0.0, f64::max),
        emeasure_max: sweep.iter().map(Confusion::emeasure).fold(0.0, f64::max),
        smeasure: smeasure(pred, gt, cfg)?,
        precision: sweep.iter().map(Confusion::precision).collect(),
        recall: sweep.iter().map(Confusion::recall).collect(),
    })
}

/// Unweighted mean of every field, curves averaged pointwise.
pub fn aggregate(reports: &[MetricReport]) -> Result<MetricReport> {
    let n = reports.len();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let mean = |f: fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / n as f64;
    let curve = |f: fn(&MetricReport) -> &[f64]| -> Vec<f64> {
        (0..THRESHOLDS).map(|k| reports.iter().map(|r| f(r)[k]).sum::<f64>() / n as f64).collect()
    };
    Ok(MetricReport {
        mae: mean(|r| r.mae),
        fbeta_max: mean(|r| r.fbeta_max),
        emeasure_max: mean(|r| r.emeasure_max),
        smeasure: mean(|r| r.smeasure),
        precision: curve(|r| &r.precision),
        recall: curve(|r| &r.recall),
    })
}
