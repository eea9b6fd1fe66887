//! Scores a few hand-made predictions against one ground-truth disk.
//!
//! ```text
//! cargo run --example metrics_report
//! ```

use cosod::metrics::{evaluate, MetricConfig};
use cosod::{BinaryMask, FloatPlane};

fn main() -> cosod::Result<()> {
    let (h, w) = (24, 24);
    let gt = BinaryMask::from_fn(h, w, |r, c| {
        let (dy, dx) = (r as f64 - 11.5, c as f64 - 11.5);
        dy * dy + dx * dx <= 36.0
    })?;
    let cfg = MetricConfig::default();

    let candidates: Vec<(&str, FloatPlane)> = vec![
        ("perfect", gt.to_float()),
        (
            "blurred",
            FloatPlane::from_fn(h, w, |r, c| {
                let d = ((r as f32 - 11.5).powi(2) + (c as f32 - 11.5).powi(2)).sqrt();
                (1.0 - (d - 6.0).max(0.0) / 4.0).clamp(0.0, 1.0)
            })?,
        ),
        ("shifted", FloatPlane::from_fn(h, w, |r, c| if gt.get(r, (c + 3) % w) { 1.0 } else { 0.0 })?),
        ("flat 0.5", FloatPlane::filled(h, w, 0.5)),
        ("inverted", gt.complement().to_float()),
    ];

    println!("{:<10} {:>8} {:>8} {:>8} {:>8}", "pred", "MAE", "Fmax", "Emax", "S");
    for (name, pred) in &candidates {
        let r = evaluate(pred, &gt, &cfg)?;
        println!("{name:<10} {:>8.4} {:>8.4} {:>8.4} {:>8.4}", r.mae, r.fbeta_max, r.emeasure_max, r.smeasure);
    }
    Ok(())
}
