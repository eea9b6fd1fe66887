//! Dataset-level runs behind the `cosod` command line.
//!
//! Each run is a plain function returning a summary value, so the runs are
//! usable from tests and examples without going through the binary.

mod evaluate;
mod gate;
mod pseudolabel_run;
mod ssloop;
mod table;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{LossWeights, DEFAULT_GATE_THRESHOLD};
use crate::metrics::MetricConfig;
use crate::pseudolabel::PseudoLabelConfig;

pub use evaluate::{collect_pairs, run_evaluate, EvaluationOutcome, FilePair};
pub use gate::{read_scores, run_gate_pool, GateOutcome};
pub use pseudolabel_run::{run_pseudolabel, GroupFailure, PseudoLabelOutcome};
pub use ssloop::{run_ssloop, write_ssloop_log, SsloopConfig, StepLog, MAX_BATCH};
pub use table::{BenchmarkRow, BenchmarkTable, ALL_ROW};

/// Process exit codes of the command line.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
}

/// Exit code for a failed run: configuration problems are usage errors,
/// everything else is a data error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) => exit::USAGE,
        _ => exit::DATA,
    }
}

/// Every tunable of a run; loadable from JSON, overridable by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub root: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub pseudolabel: PseudoLabelConfig,
    pub losses: LossWeights,
    pub metrics: MetricConfig,
    pub gate_threshold: f64,
    /// Worker threads; outputs do not depend on it.
    pub jobs: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            root: None,
            out: None,
            pseudolabel: PseudoLabelConfig::default(),
            losses: LossWeights::default(),
            metrics: MetricConfig::default(),
            gate_threshold: DEFAULT_GATE_THRESHOLD,
            jobs: 1,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.pseudolabel.validate()?;
        self.losses.validate()?;
        self.metrics.validate()?;
        if !self.gate_threshold.is_finite() {
            return Err(Error::InvalidConfig("gate threshold must be finite".into()));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidConfig("jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn require_root(&self) -> Result<&Path> {
        self.root.as_deref().ok_or_else(|| Error::InvalidConfig("a dataset root is required".into()))
    }

    pub(crate) fn require_out(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| Error::InvalidConfig("an output directory is required".into()))
    }
}

pub(crate) fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {jobs} workers: {e}")))
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(Error::io(path))
}
