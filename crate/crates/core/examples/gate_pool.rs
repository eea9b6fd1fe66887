//! Splits a scored unlabeled pool at the confidence gate.
//!
//! ```text
//! cargo run --example gate_pool -- [threshold]
//! ```

use cosod::harness::run_gate_pool;
use cosod::losses::DEFAULT_GATE_THRESHOLD;

fn main() -> cosod::Result<()> {
    let threshold = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_GATE_THRESHOLD);
    let dir = std::env::temp_dir().join("cosod-gate-pool");
    std::fs::create_dir_all(&dir).map_err(cosod::Error::io(&dir))?;
    let scores = dir.join("scores.csv");
    std::fs::write(&scores, "id,score\ncat_01,0.97\ncat_02,0.42\ndog_07,0.90\ndog_11,0.899\nbird_3,0.5\n")
        .map_err(cosod::Error::io(&scores))?;

    let outcome = run_gate_pool(&scores, threshold, &dir)?;
    println!("threshold {threshold}");
    println!("labeled:   {:?}", outcome.labeled());
    println!("unlabeled: {:?}", outcome.unlabeled());
    println!("lists written to {}", dir.display());
    Ok(())
}
