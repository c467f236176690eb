//! Region-of-interest aware compression of LiDAR point-cloud sequences.
//!
//! The crate is organised around the stages of the pipeline:
//!
//! - [`geometry`]: point clouds, poses, oriented boxes, a k-d tree and the
//!   points-in-boxes query used to label object points.
//! - [`roi`]: per-object Gaussian mixture fits, bird's-eye heatmaps, ground
//!   removal and the final point-wise RoI mask, plus ego-motion propagation.
//! - [`codec`]: an orthographic depth-image codec with a 4x4 integer DCT and
//!   per-macroblock quantization parameters driven by the RoI mask.
//! - [`eval`]: point-to-point error metrics, metric/bitrate curves, the
//!   averaged advantage between two curves and the QP sweep harness.
//! - [`synth`]: deterministic synthetic driving scenes with planted objects.
//! - [`app`]: manifests, run configuration and the commands behind the
//!   `roipcc` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod app;
pub mod codec;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod roi;
pub mod synth;

pub use error::{Error, Result};
