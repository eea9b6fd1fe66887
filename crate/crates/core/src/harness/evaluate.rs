use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{create_dir, thread_pool, BenchmarkTable};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, MetricConfig, MetricReport};
use crate::tensor_io::{read_gray_png, read_mask_png, GT_SUFFIX};

/// A prediction matched to its ground truth by relative path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilePair {
    /// Relative key, always ending in `.png`.
    pub key: PathBuf,
    pub pred: PathBuf,
    pub gt: PathBuf,
}

impl FilePair {
    /// First path component, or `.` for files at the top level.
    pub fn unit(&self) -> String {
        let mut parts = self.key.components();
        match (parts.next(), parts.next()) {
            (Some(first), Some(_)) => first.as_os_str().to_string_lossy().into_owned(),
            _ => ".".to_string(),
        }
    }
}

fn pngs_under(root: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(Error::io(&dir))? {
            let path = entry.map_err(Error::io(&dir))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "png") {
                found.push(path.strip_prefix(root).expect("walked from root").to_path_buf());
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Matches predictions to ground truth. When `gt_dir` holds any `*.gt.png`
/// files only those count, keyed with the `.gt` infix removed.
///
/// Returns the pairs plus the unmatched keys on each side.
pub fn collect_pairs(pred_dir: &Path, gt_dir: &Path) -> Result<(Vec<FilePair>, Vec<PathBuf>, Vec<PathBuf>)> {
    let preds: BTreeMap<PathBuf, PathBuf> = pngs_under(pred_dir)?.into_iter().map(|p| (p.clone(), p)).collect();
    let all_gts = pngs_under(gt_dir)?;
    let is_gt = |p: &PathBuf| p.to_string_lossy().ends_with(GT_SUFFIX);
    let gts: BTreeMap<PathBuf, PathBuf> = if all_gts.iter().any(is_gt) {
        all_gts
            .into_iter()
            .filter(is_gt)
            .map(|p| {
                let s = p.to_string_lossy();
                let key = PathBuf::from(format!("{}.png", &s[..s.len() - GT_SUFFIX.len()]));
                (key, p)
            })
            .collect()
    } else {
        all_gts.into_iter().map(|p| (p.clone(), p)).collect()
    };

    let mut pairs = Vec::new();
    let mut missing_pred = Vec::new();
    for (key, gt) in &gts {
        match preds.get(key) {
            Some(pred) => pairs.push(FilePair { key: key.clone(), pred: pred_dir.join(pred), gt: gt_dir.join(gt) }),
            None => missing_pred.push(key.clone()),
        }
    }
    let missing_gt = preds.keys().filter(|k| !gts.contains_key(*k)).cloned().collect();
    Ok((pairs, missing_pred, missing_gt))
}

#[derive(Debug)]
pub struct EvaluationOutcome {
    pub pairs: Vec<FilePair>,
    pub reports: Vec<MetricReport>,
    pub table: BenchmarkTable,
    /// Ground-truth files without a prediction.
    pub missing_pred: Vec<PathBuf>,
    /// Predictions without ground truth.
    pub missing_gt: Vec<PathBuf>,
}

/// Scores every prediction PNG against its ground truth and writes
/// `evaluation.csv` / `evaluation.md` into `out`.
pub fn run_evaluate(
    pred_dir: &Path,
    gt_dir: &Path,
    out: &Path,
    cfg: &MetricConfig,
    jobs: usize,
) -> Result<EvaluationOutcome> {
    cfg.validate()?;
    if jobs == 0 {
        return Err(Error::InvalidConfig("jobs must be at least 1".into()));
    }
    let (pairs, missing_pred, missing_gt) = collect_pairs(pred_dir, gt_dir)?;
    if pairs.is_empty() {
        return Err(Error::NothingToEvaluate);
    }
    let reports = thread_pool(jobs)?.install(|| {
        pairs
            .par_iter()
            .map(|p| evaluate(&read_gray_png(&p.pred)?, &read_mask_png(&p.gt)?, cfg))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut by_unit: BTreeMap<String, Vec<MetricReport>> = BTreeMap::new();
    for (pair, report) in pairs.iter().zip(&reports) {
        by_unit.entry(pair.unit()).or_default().push(report.clone());
    }
    let units: Vec<_> = by_unit.into_iter().collect();
    let table = BenchmarkTable::from_units(&units)?;
    create_dir(out)?;
    table.write(out, "evaluation")?;
    Ok(EvaluationOutcome { pairs, reports, table, missing_pred, missing_gt })
}
