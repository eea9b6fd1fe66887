//! Co-salient object detection tooling without a neural network in the loop.
//!
//! * [`tensor_io`]: plane sidecar files, grayscale PNG masks, dataset groups.
//! * [`pseudolabel`]: pseudo co-saliency masks from attention foregrounds and
//!   cluster co-occurrence frequencies.
//! * [`losses`]: IoU, self-contrastive, confidence-weighted and EMA kernels of
//!   the student/teacher training scheme.
//! * [`metrics`]: MAE, max F-measure, max E-measure and S-measure.
//! * [`harness`]: dataset-level runs, reports and the `cosod` command line.
//! * [`synthetic`]: seeded toy datasets in the on-disk layout.

pub mod error;
pub mod harness;
pub mod losses;
pub mod metrics;
pub mod plane;
pub mod pseudolabel;
pub mod synthetic;
pub mod tensor_io;

pub use error::{Error, Result};
pub use plane::{AttentionStack, BinaryMask, ClusterMap, FloatPlane, Plane};
