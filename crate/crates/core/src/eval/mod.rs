//! Rate-distortion evaluation.

pub mod curve;
pub mod metrics;
pub mod sweep;

pub use curve::{averaged_advantage, RateCurve, RateSample, ADVANTAGE_SAMPLES};
pub use metrics::{one_way_mse, p2p_distance, p2p_distance_with_peak, psnr, roi_restricted_error, P2pDistance, PSNR_CAP_DB};
pub use sweep::{
    bitrate_mbps, compare, measure_scene, represented_roi, sweep, write_long_csv, write_rows_csv, write_summary_csv, AdvantageReport,
    Scene, SweepConfig, SweepMode, SweepOutcome, SweepRow, DEFAULT_FRAME_RATE,
};
