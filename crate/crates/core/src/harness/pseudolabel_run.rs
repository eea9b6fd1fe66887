use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{create_dir, thread_pool, BenchmarkTable, RunConfig};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, MetricReport};
use crate::pseudolabel::{select_pseudo_masks, PseudoLabelResult};
use crate::tensor_io::{discover_groups, load_group, write_mask_png};

#[derive(Debug)]
pub struct GroupFailure {
    pub dir: PathBuf,
    pub error: Error,
}

#[derive(Debug)]
pub struct PseudoLabelOutcome {
    /// Successful groups in name order.
    pub results: Vec<PseudoLabelResult>,
    pub failures: Vec<GroupFailure>,
    /// Present when every successful group carried ground truth.
    pub benchmark: Option<BenchmarkTable>,
}

struct GroupRun {
    result: PseudoLabelResult,
    reports: Option<Vec<MetricReport>>,
}

fn run_group(dir: &Path, out: &Path, cfg: &RunConfig) -> Result<GroupRun> {
    let bundle = load_group(dir)?;
    let result = select_pseudo_masks(&bundle, &cfg.pseudolabel)?;

    let mask_dir = out.join("CM").join(bundle.name());
    create_dir(&mask_dir)?;
    for sel in &result.images {
        write_mask_png(&sel.mask, mask_dir.join(format!("{}.png", sel.image_id)))?;
    }
    let report_path = out.join("reports").join(format!("{}.json", bundle.name()));
    let mut json = serde_json::to_string_pretty(&result.report(&cfg.pseudolabel))?;
    json.push('\n');
    std::fs::write(&report_path, json).map_err(Error::io(&report_path))?;

    let reports = if bundle.has_ground_truth() {
        let reports = bundle
            .entries()
            .iter()
            .zip(&result.images)
            .map(|(e, sel)| {
                let gt = e.ground_truth.as_ref().expect("checked above");
                evaluate(&sel.mask.to_float(), gt, &cfg.metrics)
            })
            .collect::<Result<Vec<_>>>()?;
        Some(reports)
    } else {
        None
    };
    Ok(GroupRun { result, reports })
}

/// Selects pseudo masks for every group under the configured root.
///
/// Writes `CM/<group>/<id>.png`, `reports/<group>.json` and, when ground
/// truth is available, `benchmark.csv` / `benchmark.md`. A broken group is
/// reported and skipped; the run only fails when no group succeeds.
pub fn run_pseudolabel(cfg: &RunConfig) -> Result<PseudoLabelOutcome> {
    cfg.validate()?;
    let root = cfg.require_root()?;
    let out = cfg.require_out()?;
    let dirs = discover_groups(root)?;
    create_dir(&out.join("CM"))?;
    create_dir(&out.join("reports"))?;

    let runs: Vec<Result<GroupRun>> =
        thread_pool(cfg.jobs)?.install(|| dirs.par_iter().map(|dir| run_group(dir, out, cfg)).collect());

    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut units = Vec::new();
    let mut complete = true;
    for (dir, run) in dirs.into_iter().zip(runs) {
        match run {
            Ok(run) => {
                match run.reports {
                    Some(reports) => units.push((run.result.group.clone(), reports)),
                    None => complete = false,
                }
                results.push(run.result);
            }
            Err(error) => failures.push(GroupFailure { dir, error }),
        }
    }
    if results.is_empty() {
        let first = failures.remove(0);
        return Err(first.error);
    }

    let benchmark = if complete {
        let table = BenchmarkTable::from_units(&units)?;
        table.write(out, "benchmark")?;
        Some(table)
    } else {
        None
    };
    Ok(PseudoLabelOutcome { results, failures, benchmark })
}
