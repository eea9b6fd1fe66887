//! A toy teacher/student loop exercising the semi-supervised kernels.
//!
//! There is no network: a model is a parameter vector, and its predictions
//! degrade in proportion to the distance from a hidden optimum. The student
//! takes a fixed-rate step toward the optimum each iteration (unless frozen),
//! the teacher follows by EMA, and every loss term is computed on the
//! resulting maps exactly as it would be in training.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{
    cen_target, ema_update, masked_avg_prototype, normalize_confidence, sc_loss, supervised_loss, total_loss,
    unsupervised_loss, FeatureMap, LossWeights, ParamVector,
};
use crate::metrics::MetricConfig;
use crate::plane::{BinaryMask, FloatPlane, Plane};

/// Largest labeled or unlabeled batch accepted.
pub const MAX_BATCH: usize = 16;

const STUDENT_RATE: f64 = 0.2;
const FEATURE_CHANNELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsloopConfig {
    pub steps: usize,
    pub labeled_batch: usize,
    pub unlabeled_batch: usize,
    pub size: usize,
    pub param_dim: usize,
    /// Keep the student fixed so the teacher gap decays geometrically.
    pub freeze_student: bool,
    /// Ignore confidence scores and weight every unlabeled sample equally.
    pub uniform_confidence: bool,
    pub weights: LossWeights,
    pub beta2: f64,
    pub seed: u64,
}

impl Default for SsloopConfig {
    fn default() -> Self {
        SsloopConfig {
            steps: 20,
            labeled_batch: 4,
            unlabeled_batch: 8,
            size: 16,
            param_dim: 64,
            freeze_student: false,
            uniform_confidence: false,
            weights: LossWeights::default(),
            beta2: MetricConfig::default().beta2,
            seed: 0,
        }
    }
}

impl SsloopConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        for (name, n) in [("labeled_batch", self.labeled_batch), ("unlabeled_batch", self.unlabeled_batch)] {
            if !(1..=MAX_BATCH).contains(&n) {
                return Err(Error::InvalidConfig(format!("{name} must lie in 1..={MAX_BATCH}, got {n}")));
            }
        }
        if self.size < 4 || self.param_dim == 0 {
            return Err(Error::InvalidConfig("maps need at least 4×4 pixels and one parameter".into()));
        }
        if !(self.beta2.is_finite() && self.beta2 > 0.0) {
            return Err(Error::InvalidConfig(format!("beta2 must be positive, got {}", self.beta2)));
        }
        Ok(())
    }
}

/// One row of the loop log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepLog {
    pub step: usize,
    pub supervised: f64,
    pub unsupervised: f64,
    pub total: f64,
    pub weight_sum: f64,
    pub weight_min: f64,
    pub weight_max: f64,
    pub gap_before: f64,
    pub gap_after: f64,
    /// `gap_after / gap_before`, or 0 when the gap was already closed.
    pub gap_ratio: f64,
}

struct Sample {
    gt: BinaryMask,
    noise: Vec<f32>,
    /// Multiplier on the model error; hard samples degrade faster.
    hardness: f64,
    features: FeatureMap,
}

fn random_disk(rng: &mut ChaCha8Rng, size: usize) -> Result<BinaryMask> {
    let s = size as f64;
    let radius = rng.random_range(s * 0.15..s * 0.3);
    let cy = rng.random_range(radius..s - radius);
    let cx = rng.random_range(radius..s - radius);
    Plane::from_fn(size, size, |r, c| {
        let (dy, dx) = (r as f64 + 0.5 - cy, c as f64 + 0.5 - cx);
        dy * dy + dx * dx <= radius * radius
    })
}

fn sample(rng: &mut ChaCha8Rng, size: usize) -> Result<Sample> {
    let gt = random_disk(rng, size)?;
    let noise = (0..size * size).map(|_| rng.random_range(0.0f32..1.0)).collect();
    let channels = (0..FEATURE_CHANNELS)
        .map(|ch| {
            let data = gt
                .as_slice()
                .iter()
                .map(|&fg| {
                    let base = if (ch % 2 == 0) == fg { 0.8 } else { 0.1 };
                    base + rng.random_range(0.0f32..0.1)
                })
                .collect();
            FloatPlane::new(size, size, data)
        })
        .collect::<Result<Vec<_>>>()?;
    let hardness = rng.random_range(1.0..3.0);
    Ok(Sample { gt, noise, hardness, features: FeatureMap::new(channels)? })
}

fn distance(a: &ParamVector, b: &ParamVector) -> f64 {
    let sq: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum();
    (sq / a.len() as f64).sqrt()
}

/// Prediction of a model whose parameters sit `error` away from the optimum.
fn predict(s: &Sample, error: f64) -> Result<FloatPlane> {
    let e = (error * s.hardness).min(1.0) as f32;
    let data = s.gt.as_slice().iter().zip(&s.noise).map(|(&fg, &n)| if fg { 1.0 - e * n } else { e * n }).collect();
    FloatPlane::new(s.gt.height(), s.gt.width(), data)
}

fn random_params(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Result<ParamVector> {
    ParamVector::new((0..dim).map(|_| rng.random_range(-scale..scale)).collect())
}

/// Runs the loop and returns one log row per step.
pub fn run_ssloop(cfg: &SsloopConfig) -> Result<Vec<StepLog>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let labeled = (0..cfg.labeled_batch).map(|_| sample(&mut rng, cfg.size)).collect::<Result<Vec<_>>>()?;
    let unlabeled = (0..cfg.unlabeled_batch).map(|_| sample(&mut rng, cfg.size)).collect::<Result<Vec<_>>>()?;
    let optimum = random_params(&mut rng, cfg.param_dim, 0.5)?;
    let mut student = random_params(&mut rng, cfg.param_dim, 0.5)?;
    let mut teacher = random_params(&mut rng, cfg.param_dim, 0.5)?;

    let mut log = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let student_err = distance(&student, &optimum);
        let teacher_err = distance(&teacher, &optimum);

        let mut preds = Vec::with_capacity(labeled.len());
        let mut sc_terms = Vec::with_capacity(labeled.len());
        for s in &labeled {
            let pred = predict(s, student_err)?;
            let proto = masked_avg_prototype(&s.features, &pred)?;
            let fg = masked_avg_prototype(&s.features, &s.gt)?;
            let bg = masked_avg_prototype(&s.features, &s.gt.complement())?;
            sc_terms.push(sc_loss(&proto, &fg, &bg, cfg.weights.eps)?);
            preds.push(pred);
        }
        let gts: Vec<BinaryMask> = labeled.iter().map(|s| s.gt.clone()).collect();
        let supervised = supervised_loss(&preds, &gts, &sc_terms, cfg.weights.lambda_sc)?;

        let student_u = unlabeled.iter().map(|s| predict(s, student_err)).collect::<Result<Vec<_>>>()?;
        let teacher_u = unlabeled.iter().map(|s| predict(s, teacher_err)).collect::<Result<Vec<_>>>()?;
        let raw = if cfg.uniform_confidence {
            vec![1.0; unlabeled.len()]
        } else {
            unlabeled
                .iter()
                .zip(&teacher_u)
                .map(|(s, t)| cen_target(t, &s.gt, cfg.beta2))
                .collect::<Result<Vec<_>>>()?
        };
        let conf = normalize_confidence(&raw)?;
        let unsupervised = unsupervised_loss(&student_u, &teacher_u, &conf)?;
        let total = total_loss(supervised, unsupervised, cfg.weights.lambda_u);

        if !cfg.freeze_student {
            let stepped =
                student.as_slice().iter().zip(optimum.as_slice()).map(|(s, o)| s + STUDENT_RATE * (o - s)).collect();
            student = ParamVector::new(stepped)?;
        }
        let gap_before = teacher.max_abs_diff(&student)?;
        teacher = ema_update(&teacher, &student, cfg.weights.lambda_d)?;
        let gap_after = teacher.max_abs_diff(&student)?;

        let w = conf.weights();
        log.push(StepLog {
            step,
            supervised,
            unsupervised,
            total,
            weight_sum: w.iter().sum(),
            weight_min: w.iter().copied().fold(f64::INFINITY, f64::min),
            weight_max: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            gap_before,
            gap_after,
            gap_ratio: if gap_before > 0.0 { gap_after / gap_before } else { 0.0 },
        });
    }
    Ok(log)
}

/// Writes the log as CSV with a header row.
pub fn write_ssloop_log(log: &[StepLog], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in log {
        writer.serialize(row)?;
    }
    writer.flush().map_err(Error::io(path))
}
