//! Rate sweeps over the background QP.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::curve::{averaged_advantage, RateCurve, RateSample, ADVANTAGE_SAMPLES};
use super::metrics::{p2p_distance, roi_restricted_error};
use crate::codec::{decode_to_clouds, encode_sequence, PlaneConfig, ProjectionMaps};
use crate::geometry::PointCloud;
use crate::roi::RoiMask;
use crate::{Error, Result};

pub const DEFAULT_FRAME_RATE: f64 = 20.0;

/// Frames of one scene with their RoI masks.
#[derive(Debug, Clone)]
pub struct Scene {
    pub id: String,
    pub clouds: Vec<PointCloud>,
    pub masks: Vec<RoiMask>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// RoI macroblocks at `q_r`, the rest at each `q_b`.
    Roi,
    /// Every macroblock at each `q_b`.
    Uniform,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub q_r: i32,
    pub q_bs: Vec<i32>,
    pub plane: PlaneConfig,
    pub frame_rate: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            q_r: 20,
            q_bs: vec![30, 33, 36, 39, 42, 45],
            plane: PlaneConfig::default(),
            frame_rate: DEFAULT_FRAME_RATE,
        }
    }
}

/// One (scene, q_b) measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scene: String,
    pub mode: SweepMode,
    pub q_r: i32,
    pub q_b: i32,
    pub frames: usize,
    pub bits: usize,
    pub bitrate_mbps: f64,
    pub psnr_db: f64,
    /// Mean over frames with represented RoI points; see [`represented_roi`].
    pub roi_mse: f64,
    /// Same statistic over every RoI point, dropped ones included.
    pub roi_mse_all: f64,
    /// RoI points overwritten or outside the plane, summed over frames.
    pub roi_dropped: usize,
}

/// RoI points that own a pixel. Points lost to projection sit at the same
/// place for every QP and are reported through `roi_dropped` and PSNR.
pub fn represented_roi(mask: &RoiMask, maps: &ProjectionMaps) -> RoiMask {
    RoiMask::new((0..mask.len()).map(|i| mask.get(i) && maps.is_kept(i)).collect())
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub mode: SweepMode,
    pub rows: Vec<SweepRow>,
    pub psnr: RateCurve,
    pub roi_error: RateCurve,
}

/// `bits` spread over `frames` at `frame_rate` Hz, in Mbit/s.
pub fn bitrate_mbps(bits: usize, frames: usize, frame_rate: f64) -> f64 {
    bits as f64 * frame_rate / frames as f64 / 1e6
}

/// Encodes, decodes and measures one scene.
pub fn measure_scene(scene: &Scene, mode: SweepMode, q_r: i32, q_b: i32, plane: &PlaneConfig, frame_rate: f64) -> Result<SweepRow> {
    if scene.clouds.is_empty() {
        return Err(Error::Empty("scene without frames"));
    }
    let enc = match mode {
        SweepMode::Roi => encode_sequence(&scene.clouds, Some(&scene.masks), q_r, q_b, plane)?,
        SweepMode::Uniform => encode_sequence(&scene.clouds, None, q_b, q_b, plane)?,
    };
    let recon = decode_to_clouds(&enc.bitstream)?;
    let mut psnr = 0.0;
    let (mut roi_sum, mut roi_frames) = (0.0, 0usize);
    let (mut all_sum, mut all_frames) = (0.0, 0usize);
    let mut roi_dropped = 0;
    for (((orig, rec), mask), maps) in scene.clouds.iter().zip(&recon).zip(&scene.masks).zip(&enc.maps) {
        psnr += p2p_distance(orig, rec)?.psnr_db;
        if mask.count() == 0 {
            continue;
        }
        all_sum += roi_restricted_error(orig, rec, mask)?;
        all_frames += 1;
        let kept = represented_roi(mask, maps);
        roi_dropped += mask.count() - kept.count();
        if kept.count() > 0 {
            roi_sum += roi_restricted_error(orig, rec, &kept)?;
            roi_frames += 1;
        }
    }
    let mean = |sum: f64, n: usize| if n > 0 { sum / n as f64 } else { f64::NAN };
    let frames = scene.clouds.len();
    Ok(SweepRow {
        scene: scene.id.clone(),
        mode,
        q_r: if mode == SweepMode::Roi { q_r } else { q_b },
        q_b,
        frames,
        bits: enc.total_bits,
        bitrate_mbps: bitrate_mbps(enc.total_bits, frames, frame_rate),
        psnr_db: psnr / frames as f64,
        roi_mse: mean(roi_sum, roi_frames),
        roi_mse_all: mean(all_sum, all_frames),
        roi_dropped,
    })
}

/// Measures every scene at every `q_b`; curve points are scene averages.
pub fn sweep(scenes: &[Scene], config: &SweepConfig, mode: SweepMode) -> Result<SweepOutcome> {
    if scenes.is_empty() || config.q_bs.is_empty() {
        return Err(Error::Empty("sweep needs scenes and background QPs"));
    }
    for s in scenes {
        if s.masks.len() != s.clouds.len() {
            return Err(Error::LengthMismatch {
                expected: s.clouds.len(),
                actual: s.masks.len(),
            });
        }
    }
    let jobs: Vec<(usize, i32)> = config
        .q_bs
        .iter()
        .flat_map(|&q| (0..scenes.len()).map(move |s| (s, q)))
        .collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(s, q_b)| measure_scene(&scenes[s], mode, config.q_r, q_b, &config.plane, config.frame_rate))
        .collect::<Result<_>>()?;

    let mut psnr = Vec::new();
    let mut roi = Vec::new();
    for &q_b in &config.q_bs {
        let group: Vec<&SweepRow> = rows.iter().filter(|r| r.q_b == q_b).collect();
        let n = group.len() as f64;
        let bitrate = group.iter().map(|r| r.bitrate_mbps).sum::<f64>() / n;
        psnr.push(RateSample {
            bitrate,
            value: group.iter().map(|r| r.psnr_db).sum::<f64>() / n,
        });
        let defined: Vec<f64> = group.iter().map(|r| r.roi_mse).filter(|v| v.is_finite()).collect();
        if defined.is_empty() {
            return Err(Error::Empty("no scene has RoI points"));
        }
        roi.push(RateSample {
            bitrate,
            value: defined.iter().sum::<f64>() / defined.len() as f64,
        });
    }
    Ok(SweepOutcome {
        mode,
        rows,
        psnr: RateCurve::from_unsorted(psnr)?,
        roi_error: RateCurve::from_unsorted(roi)?,
    })
}

/// Averaged advantage of `roi` over `baseline`, per metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdvantageReport {
    /// dB; positive favours the RoI sweep.
    pub psnr_db: f64,
    /// m²; negative favours the RoI sweep.
    pub roi_mse: f64,
}

pub fn compare(roi: &SweepOutcome, baseline: &SweepOutcome) -> Result<AdvantageReport> {
    Ok(AdvantageReport {
        psnr_db: averaged_advantage(&roi.psnr, &baseline.psnr, ADVANTAGE_SAMPLES)?,
        roi_mse: averaged_advantage(&roi.roi_error, &baseline.roi_error, ADVANTAGE_SAMPLES)?,
    })
}

pub fn write_rows_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow {
    mode: SweepMode,
    q_r: i32,
    bitrate_mbps: f64,
    psnr_db: f64,
    roi_mse: f64,
}

/// One row per curve point, both metrics side by side.
pub fn write_summary_csv<W: Write>(outcome: &SweepOutcome, q_r: i32, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (p, r) in outcome.psnr.samples().iter().zip(outcome.roi_error.samples()) {
        out.serialize(SummaryRow {
            mode: outcome.mode,
            q_r,
            bitrate_mbps: p.bitrate,
            psnr_db: p.value,
            roi_mse: r.value,
        })
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct LongRow<'a> {
    curve: &'a str,
    metric: &'a str,
    bitrate_mbps: f64,
    value: f64,
}

/// Plot-ready `(curve, metric, bitrate, value)` rows.
pub fn write_long_csv<W: Write>(outcomes: &[(&str, &SweepOutcome)], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (name, o) in outcomes {
        for (metric, curve) in [("psnr_db", &o.psnr), ("roi_mse", &o.roi_error)] {
            for s in curve.samples() {
                out.serialize(LongRow {
                    curve: name,
                    metric,
                    bitrate_mbps: s.bitrate,
                    value: s.value,
                })
                .map_err(csv_err)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("csv: {other:?}")),
    }
}
