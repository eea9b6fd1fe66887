use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cosod::harness::{self, exit, RunConfig, SsloopConfig};
use cosod::pseudolabel::{Fallback, OverlapMode};
use cosod::{Error, Result};

#[derive(Parser)]
#[command(name = "cosod", version, about = "Pseudo co-saliency masks, loss kernels and CoSOD metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select pseudo masks for every group under --root.
    Pseudolabel(Common),
    /// Score predicted PNGs against ground-truth PNGs.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the toy teacher/student loop and log every step.
    SsloopDemo {
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        labeled_batch: Option<usize>,
        #[arg(long)]
        unlabeled_batch: Option<usize>,
        #[arg(long)]
        freeze_student: bool,
        #[arg(long)]
        uniform_confidence: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Split an `id,score` CSV into labeled and unlabeled id lists.
    GatePool {
        #[arg(long)]
        scores: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    root: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    overlap_mode: Option<OverlapMode>,
    #[arg(long)]
    min_pixel_fraction: Option<f64>,
    #[arg(long)]
    fallback: Option<Fallback>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda_sc: Option<f64>,
    #[arg(long)]
    lambda_u: Option<f64>,
    #[arg(long)]
    lambda_d: Option<f64>,
    #[arg(long)]
    gate_threshold: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$($field).+ = v; })*
            };
        }
        set!(
            top_k => pseudolabel.top_k,
            overlap_mode => pseudolabel.overlap_mode,
            min_pixel_fraction => pseudolabel.min_pixel_fraction,
            fallback => pseudolabel.fallback,
            beta2 => metrics.beta2,
            alpha => metrics.alpha,
            lambda_sc => losses.lambda_sc,
            lambda_u => losses.lambda_u,
            lambda_d => losses.lambda_d,
            gate_threshold => gate_threshold,
            jobs => jobs,
            seed => seed,
        );
        if self.root.is_some() {
            cfg.root = self.root.clone();
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn require_out(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.out.clone().ok_or_else(|| Error::InvalidConfig("--out is required".into()))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Pseudolabel(common) => {
            let cfg = common.resolve()?;
            let outcome = harness::run_pseudolabel(&cfg)?;
            for f in &outcome.failures {
                eprintln!("warning: skipped {}: {}", f.dir.display(), f.error);
            }
            for r in &outcome.results {
                let fallbacks = r.images.iter().filter(|s| s.fallback_used).count();
                println!("{}: {} images, {} fallbacks", r.group, r.images.len(), fallbacks);
            }
            if let Some(table) = &outcome.benchmark {
                print!("{}", table.to_markdown());
            }
        }
        Command::Evaluate { pred, gt, common } => {
            let cfg = common.resolve()?;
            let out = require_out(&cfg)?;
            let outcome = harness::run_evaluate(&pred, &gt, &out, &cfg.metrics, cfg.jobs)?;
            for key in &outcome.missing_pred {
                eprintln!("warning: no prediction for {}", key.display());
            }
            for key in &outcome.missing_gt {
                eprintln!("warning: no ground truth for {}", key.display());
            }
            print!("{}", outcome.table.to_markdown());
        }
        Command::SsloopDemo { steps, labeled_batch, unlabeled_batch, freeze_student, uniform_confidence, common } => {
            let cfg = common.resolve()?;
            let out = require_out(&cfg)?;
            let defaults = SsloopConfig::default();
            let loop_cfg = SsloopConfig {
                steps: steps.unwrap_or(defaults.steps),
                labeled_batch: labeled_batch.unwrap_or(defaults.labeled_batch),
                unlabeled_batch: unlabeled_batch.unwrap_or(defaults.unlabeled_batch),
                freeze_student,
                uniform_confidence,
                weights: cfg.losses,
                beta2: cfg.metrics.beta2,
                seed: cfg.seed,
                ..defaults
            };
            let log = harness::run_ssloop(&loop_cfg)?;
            std::fs::create_dir_all(&out).map_err(|source| Error::Io { path: out.clone(), source })?;
            harness::write_ssloop_log(&log, &out.join("ssloop.csv"))?;
            for row in &log {
                println!(
                    "step {:>3}  total {:.6}  sup {:.6}  unsup {:.6}  gap {:.3e} -> {:.3e}",
                    row.step, row.total, row.supervised, row.unsupervised, row.gap_before, row.gap_after
                );
            }
        }
        Command::GatePool { scores, common } => {
            let cfg = common.resolve()?;
            let out = require_out(&cfg)?;
            let outcome = harness::run_gate_pool(&scores, cfg.gate_threshold, &out)?;
            println!("{} labeled, {} unlabeled", outcome.partition.high.len(), outcome.partition.low.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::SUCCESS as u8 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::exit_code(&e) as u8)
        }
    }
}
