//! Regenerates the committed test fixture and its golden outputs.
//!
//! ```text
//! cargo run --example make_fixture
//! ```

use std::path::Path;

use cosod::harness::{run_pseudolabel, RunConfig};
use cosod::synthetic::{generate, write_dataset, SyntheticSpec};

fn main() -> cosod::Result<()> {
    let base = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests");
    let dataset = base.join("fixtures").join("dataset");
    let golden = base.join("golden");
    for dir in [&dataset, &golden] {
        if dir.exists() {
            std::fs::remove_dir_all(dir).map_err(cosod::Error::io(dir.as_path()))?;
        }
    }

    write_dataset(&dataset, &generate(&SyntheticSpec::default())?)?;
    let cfg = RunConfig { root: Some(dataset.clone()), out: Some(golden.clone()), ..Default::default() };
    let outcome = run_pseudolabel(&cfg)?;
    println!("fixture: {}", dataset.display());
    println!("golden:  {}", golden.display());
    if let Some(table) = outcome.benchmark {
        print!("{}", table.to_markdown());
    }
    Ok(())
}
