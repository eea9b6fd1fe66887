//! Generates a synthetic dataset and selects pseudo masks for every group.
//!
//! ```text
//! cargo run --example pseudo_labels -- [out_dir]
//! ```

use cosod::harness::{run_pseudolabel, RunConfig};
use cosod::pseudolabel::OverlapMode;
use cosod::synthetic::{generate, write_dataset, SyntheticSpec};

fn main() -> cosod::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("cosod-pseudo-labels"), Into::into);
    let root = out.join("dataset");
    write_dataset(&root, &generate(&SyntheticSpec { seed: 11, ..Default::default() })?)?;

    for mode in [OverlapMode::ImageArea, OverlapMode::MaskArea] {
        let mut cfg = RunConfig {
            root: Some(root.clone()),
            out: Some(out.join(format!("{mode:?}"))),
            jobs: 4,
            ..Default::default()
        };
        cfg.pseudolabel.overlap_mode = mode;
        let outcome = run_pseudolabel(&cfg)?;
        println!("overlap mode {mode:?}");
        for group in &outcome.results {
            for sel in &group.images {
                let best =
                    sel.candidates.iter().map(|c| format!("{}:{:.3}", c.category, c.overlap)).collect::<Vec<_>>();
                println!("  {}/{} -> {:?}  [{}]", group.group, sel.image_id, sel.selected, best.join(" "));
            }
        }
        if let Some(table) = outcome.benchmark {
            print!("{}", table.to_markdown());
        }
    }
    Ok(())
}
