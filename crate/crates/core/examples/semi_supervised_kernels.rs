//! Individual loss kernels, then the toy teacher/student loop.
//!
//! ```text
//! cargo run --example semi_supervised_kernels
//! ```

use cosod::harness::{run_ssloop, SsloopConfig};
use cosod::losses::{ema_update, iou_loss, normalize_confidence, total_loss, ParamVector};
use cosod::{BinaryMask, FloatPlane};

fn main() -> cosod::Result<()> {
    let gt = BinaryMask::from_fn(8, 8, |r, c| (2..6).contains(&r) && (2..6).contains(&c))?;
    let soft = FloatPlane::from_fn(8, 8, |r, c| if gt.get(r, c) { 0.8 } else { 0.1 })?;
    println!("iou(gt, gt)   = {:.3e}", iou_loss(&gt, &gt)?);
    println!("iou(soft, gt) = {:.6}", iou_loss(&soft, &gt)?);

    let conf = normalize_confidence(&[0.9, 0.6, 0.3, 0.0])?;
    println!("confidence weights {:?}", conf.weights());
    println!("total = 0.4 + 1.0 * 0.2 = {}", total_loss(0.4, 0.2, 1.0));

    let student = ParamVector::new(vec![1.0; 4])?;
    let mut teacher = ParamVector::new(vec![0.0; 4])?;
    for k in 1..=3 {
        teacher = ema_update(&teacher, &student, 0.95)?;
        println!("EMA step {k}: gap {:.6}", teacher.max_abs_diff(&student)?);
    }

    println!("\nstep      total        sup      unsup   w_min   w_max");
    for row in run_ssloop(&SsloopConfig { seed: 3, ..Default::default() })? {
        println!(
            "{:>4} {:>10.6} {:>10.6} {:>10.6} {:>7.4} {:>7.4}",
            row.step, row.total, row.supervised, row.unsupervised, row.weight_min, row.weight_max
        );
    }
    Ok(())
}
