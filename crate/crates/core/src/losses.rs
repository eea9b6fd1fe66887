//! Numeric kernels of the semi-supervised student/teacher scheme.
//!
//! Nothing here trains a network: the kernels take already-produced
//! prediction maps, prototypes and flat parameter vectors. Every reduction
//! runs in a fixed order so results are bit-stable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{fbeta_max, MetricConfig};
use crate::plane::{BinaryMask, FloatPlane, PixelWeights};

/// Smoothing constant for the soft IoU loss.
pub const IOU_EPS: f64 = 1e-6;

/// Loss mixing constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    /// Weight of the self-contrastive term in the supervised loss.
    pub lambda_sc: f64,
    /// Weight of the unsupervised loss in the total loss.
    pub lambda_u: f64,
    /// EMA decay of the teacher parameters.
    pub lambda_d: f64,
    pub eps: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { lambda_sc: 0.1, lambda_u: 1.0, lambda_d: 0.95, eps: IOU_EPS }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.lambda_sc.is_finite() && self.lambda_sc >= 0.0) {
            return bad(format!("lambda_sc must be finite and non-negative, got {}", self.lambda_sc));
        }
        if !(self.lambda_u.is_finite() && self.lambda_u >= 0.0) {
            return bad(format!("lambda_u must be finite and non-negative, got {}", self.lambda_u));
        }
        if !(0.0..=1.0).contains(&self.lambda_d) {
            return bad(format!("lambda_d must lie in [0, 1], got {}", self.lambda_d));
        }
        if !(self.eps > 0.0 && self.eps <= 1e-3) {
            return bad(format!("eps must lie in (0, 1e-3], got {}", self.eps));
        }
        Ok(())
    }
}

fn check_dims(a: &impl PixelWeights, b: &impl PixelWeights, context: &str) -> Result<()> {
    if a.dims() == b.dims() {
        Ok(())
    } else {
        Err(Error::dims(context, a.dims(), b.dims()))
    }
}

/// Soft IoU loss `1 − (Σpt + ε) / (Σp + Σt − Σpt + ε)`.
pub fn iou_loss(pred: &impl PixelWeights, target: &impl PixelWeights) -> Result<f64> {
    iou_loss_with_eps(pred, target, IOU_EPS)
}

pub fn iou_loss_with_eps(pred: &impl PixelWeights, target: &impl PixelWeights, eps: f64) -> Result<f64> {
    check_dims(pred, target, "iou loss")?;
    let (h, w) = pred.dims();
    let (mut inter, mut sum_p, mut sum_t) = (0.0, 0.0, 0.0);
    for i in 0..h * w {
        let (p, t) = (pred.weight(i), target.weight(i));
        inter += p * t;
        sum_p += p;
        sum_t += t;
    }
    Ok(1.0 - (inter + eps) / (sum_p + sum_t - inter + eps))
}

/// Multi-channel feature map; every channel shares one `H×W`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: Vec<FloatPlane>,
}

impl FeatureMap {
    pub fn new(channels: Vec<FloatPlane>) -> Result<Self> {
        let first = channels.first().ok_or(Error::InvalidConfig("feature map needs a channel".into()))?;
        for c in &channels[1..] {
            first.ensure_same_dims(c, "feature channels")?;
        }
        Ok(FeatureMap { channels })
    }

    pub fn channels(&self) -> &[FloatPlane] {
        &self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        self.channels[0].dims()
    }
}

/// Per-channel feature summary vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Prototype(pub Vec<f64>);

impl Prototype {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Masked average pooling: `Σ(feat·weight) / Σweight` per channel, zero
/// when the weight is empty.
pub fn masked_avg_prototype(feat: &FeatureMap, weight: &impl PixelWeights) -> Result<Prototype> {
    if feat.dims() != weight.dims() {
        return Err(Error::dims("masked average pooling", feat.dims(), weight.dims()));
    }
    let n = feat.dims().0 * feat.dims().1;
    let total: f64 = (0..n).map(|i| weight.weight(i)).sum();
    let values = feat
        .channels()
        .iter()
        .map(|channel| {
            if total == 0.0 {
                return 0.0;
            }
            let s: f64 = channel.as_slice().iter().enumerate().map(|(i, &v)| v as f64 * weight.weight(i)).sum();
            s / total
        })
        .collect();
    Ok(Prototype(values))
}

/// Cosine similarity; zero if either vector is zero.
pub fn cosine(a: &Prototype, b: &Prototype) -> Result<f64> {
    if a.0.len() != b.0.len() {
        return Err(Error::BatchLengthMismatch { left: a.0.len(), right: b.0.len() });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Self-contrastive loss `−log(cos_c + ε) − log(1 − cos_b + ε)`.
///
/// `cos_c` is floored at zero so the loss stays finite for anti-aligned
/// foreground prototypes.
pub fn sc_loss(proto: &Prototype, proto_fg: &Prototype, proto_bg: &Prototype, eps: f64) -> Result<f64> {
    let cos_c = cosine(proto, proto_fg)?.max(0.0);
    let cos_b = cosine(proto, proto_bg)?;
    Ok(-(cos_c + eps).ln() - (1.0 - cos_b + eps).ln())
}

fn ensure_aligned(left: usize, right: usize) -> Result<()> {
    if left == 0 || right == 0 {
        return Err(Error::EmptyBatch);
    }
    if left != right {
        return Err(Error::BatchLengthMismatch { left, right });
    }
    Ok(())
}

/// Labeled-batch loss: mean IoU loss plus `λ_sc` times the mean SC term.
pub fn supervised_loss(preds: &[FloatPlane], gts: &[BinaryMask], sc_terms: &[f64], lambda_sc: f64) -> Result<f64> {
    ensure_aligned(preds.len(), gts.len())?;
    ensure_aligned(preds.len(), sc_terms.len())?;
    let mut iou_sum = 0.0;
    for (p, g) in preds.iter().zip(gts) {
        iou_sum += iou_loss(p, g)?;
    }
    let n = preds.len() as f64;
    Ok(iou_sum / n + lambda_sc * sc_terms.iter().sum::<f64>() / n)
}

/// Normalized per-sample confidence weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceBatch {
    raw: Vec<f64>,
    weights: Vec<f64>,
}

impl ConfidenceBatch {
    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `raw / Σraw`, or uniform weights when every score is zero.
pub fn normalize_confidence(raw: &[f64]) -> Result<ConfidenceBatch> {
    if let Some(index) = raw.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::NegativeScore { index, value: raw[index] });
    }
    let total: f64 = raw.iter().sum();
    let weights =
        if total > 0.0 { raw.iter().map(|v| v / total).collect() } else { vec![1.0 / raw.len() as f64; raw.len()] };
    Ok(ConfidenceBatch { raw: raw.to_vec(), weights })
}

/// Confidence-weighted teacher/student loss: `(1/|B_u|) Σ g̃_j · iou(s_j, t_j)`.
pub fn unsupervised_loss(student: &[FloatPlane], teacher: &[FloatPlane], conf: &ConfidenceBatch) -> Result<f64> {
    ensure_aligned(student.len(), teacher.len())?;
    ensure_aligned(student.len(), conf.len())?;
    let mut acc = 0.0;
    for ((s, t), g) in student.iter().zip(teacher).zip(conf.weights()) {
        acc += g * iou_loss(s, t)?;
    }
    Ok(acc / student.len() as f64)
}

pub fn total_loss(supervised: f64, unsupervised: f64, lambda_u: f64) -> f64 {
    supervised + lambda_u * unsupervised
}

/// Flat parameter vector standing in for model weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(ParamVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest elementwise absolute difference.
    pub fn max_abs_diff(&self, other: &ParamVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::BatchLengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

/// Teacher update `λ_d·teacher + (1 − λ_d)·student`.
pub fn ema_update(teacher: &ParamVector, student: &ParamVector, lambda_d: f64) -> Result<ParamVector> {
    if teacher.len() != student.len() {
        return Err(Error::BatchLengthMismatch { left: teacher.len(), right: student.len() });
    }
    let blended = teacher.0.iter().zip(&student.0).map(|(t, s)| lambda_d * t + (1.0 - lambda_d) * s).collect();
    Ok(ParamVector(blended))
}

/// Regression target for the confidence network: the best F-measure of a
/// prediction against its ground truth.
pub fn cen_target(pred: &FloatPlane, gt: &BinaryMask, beta2: f64) -> Result<f64> {
    fbeta_max(pred, gt, &MetricConfig { beta2, ..Default::default() })
}

pub fn cen_mse(predicted: &[f64], targets: &[f64]) -> Result<f64> {
    ensure_aligned(predicted.len(), targets.len())?;
    let sq: f64 = predicted.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sq / predicted.len() as f64)
}

/// Index partition of a scored pool.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PoolPartition {
    /// Scores at or above the threshold.
    pub high: Vec<usize>,
    pub low: Vec<usize>,
}

pub const DEFAULT_GATE_THRESHOLD: f64 = 0.9;

pub fn gate_unlabeled_pool(scores: &[f64], threshold: f64) -> PoolPartition {
    let (high, low) = (0..scores.len()).partition(|&i| scores[i] >= threshold);
    PoolPartition { high, low }
}
