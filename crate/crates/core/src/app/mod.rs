//! Commands behind the `roipcc` binary.
//!
//! Each command reads and writes files only through the paths it is given;
//! outputs are written atomically and are deterministic for a fixed seed and
//! configuration.

pub mod config;
pub mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use config::RunConfig;
pub use manifest::{FrameEntry, LoadedManifest, SceneManifest};

use crate::codec::{decode_to_clouds, encode_sequence, Bitstream};
use crate::eval::{
    bitrate_mbps, compare, sweep, write_long_csv, write_rows_csv, write_summary_csv, AdvantageReport, Scene,
    SweepConfig, SweepMode,
};
use crate::geometry::io::{save_boxes, save_cloud, write_atomic};
use crate::geometry::{points_in_boxes, points_in_boxes_bruteforce, OrientedBox, Point3, PointCloud};
use crate::roi::{propagate_mask, roi_from_boxes, RoiMask};
use crate::synth::{generate_scene, SceneParams};
use crate::{Error, Result};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "ROIPCC_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::QpOutOfRange(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Sizes the global thread pool; `None` keeps the default.
pub fn init_workers(workers: Option<usize>) -> Result<()> {
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    Ok(())
}

fn frame_name(t: usize, ext: &str) -> String {
    format!("{t:06}.{ext}")
}

/// Mask file of frame position `t` inside a mask directory.
pub fn mask_path(dir: &Path, t: usize) -> PathBuf {
    dir.join(frame_name(t, "rmsk"))
}

pub fn load_masks(dir: &Path, frames: usize) -> Result<Vec<RoiMask>> {
    (0..frames)
        .map(|t| RoiMask::read_rle(fs::File::open(mask_path(dir, t))?))
        .collect()
}

/// Generates a synthetic sequence under `out` and writes its manifest.
pub fn cmd_synth(out: &Path, seed: u64, params: &SceneParams) -> Result<PathBuf> {
    let started = Instant::now();
    let scene = generate_scene(seed, params)?;
    let mut frames = Vec::with_capacity(scene.frames.len());
    for (t, f) in scene.frames.iter().enumerate() {
        let cloud = PathBuf::from("frames").join(frame_name(t, "bin"));
        let boxes = PathBuf::from("boxes").join(frame_name(t, "json"));
        let labels = PathBuf::from("labels").join(frame_name(t, "json"));
        save_cloud(&f.cloud, &out.join(&cloud))?;
        save_boxes(&f.boxes, &out.join(&boxes))?;
        write_atomic(&out.join(&labels), serde_json::to_string(&f.labels)?.as_bytes())?;
        frames.push(FrameEntry {
            frame_index: f.cloud.frame_index,
            cloud,
            pose: f.cloud.pose.clone(),
            boxes: Some(boxes),
            labels: Some(labels),
        });
    }
    let manifest = SceneManifest {
        sequence_id: format!("synth-{seed}"),
        frame_rate: params.frame_rate,
        frames,
    };
    let path = out.join("manifest.json");
    write_atomic(&path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    info!("synth: {} frames in {:?}", manifest.frames.len(), started.elapsed());
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct RoiReport {
    pub frames: usize,
    pub key_frames: usize,
    pub roi_points: Vec<usize>,
}

/// Detects RoI on every `stride`-th frame and propagates it to the others.
pub fn compute_masks(scene: &LoadedManifest, cfg: &RunConfig) -> Result<(Vec<RoiMask>, usize)> {
    let params = cfg.roi_params();
    let mut masks = Vec::with_capacity(scene.len());
    let mut key: Option<(PointCloud, RoiMask)> = None;
    let mut key_frames = 0;
    for t in 0..scene.len() {
        let cloud = scene.cloud(t)?;
        let mask = if t % cfg.stride == 0 {
            let started = Instant::now();
            let m = roi_from_boxes(&cloud, &scene.boxes(t)?, &params)?;
            info!("roi: key frame {t} labeled {} of {} points in {:?}", m.count(), m.len(), started.elapsed());
            key_frames += 1;
            key = Some((cloud, m.clone()));
            m
        } else {
            let (src, src_mask) = key.as_ref().expect("frame 0 is a key frame");
            propagate_mask(src_mask, src, &src.pose, &cloud, &cloud.pose, cfg.propagation_radius)?
        };
        masks.push(mask);
    }
    Ok((masks, key_frames))
}

pub fn cmd_roi(manifest: &Path, cfg: &RunConfig, out: &Path) -> Result<RoiReport> {
    let scene = SceneManifest::load(manifest)?;
    let (masks, key_frames) = compute_masks(&scene, cfg)?;
    for (t, m) in masks.iter().enumerate() {
        let mut buf = Vec::new();
        m.write_rle(&mut buf)?;
        write_atomic(&mask_path(out, t), &buf)?;
    }
    Ok(RoiReport {
        frames: masks.len(),
        key_frames,
        roi_points: masks.iter().map(RoiMask::count).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodeReport {
    pub frames: usize,
    pub total_bits: usize,
    pub frame_bits: Vec<usize>,
    pub bitrate_mbps: f64,
    pub roi_macroblocks: Vec<usize>,
}

/// Encodes a sequence; without a mask directory every macroblock uses `q_b`.
pub fn cmd_encode(manifest: &Path, masks: Option<&Path>, cfg: &RunConfig, q_b: i32, out: &Path) -> Result<EncodeReport> {
    let scene = SceneManifest::load(manifest)?;
    let clouds = scene.clouds()?;
    let masks = masks.map(|d| load_masks(d, clouds.len())).transpose()?;
    let started = Instant::now();
    let enc = match &masks {
        Some(m) => encode_sequence(&clouds, Some(m), cfg.q_r, q_b, &cfg.plane)?,
        None => encode_sequence(&clouds, None, q_b, q_b, &cfg.plane)?,
    };
    info!("encode: {} frames, {} bits in {:?}", clouds.len(), enc.total_bits, started.elapsed());
    write_atomic(out, &enc.bitstream.to_bytes()?)?;
    Ok(EncodeReport {
        frames: clouds.len(),
        total_bits: enc.total_bits,
        bitrate_mbps: bitrate_mbps(enc.total_bits, clouds.len(), scene.manifest.frame_rate),
        frame_bits: enc.frame_bits,
        roi_macroblocks: enc.indicator.columns.iter().map(|c| c.iter().filter(|&&b| b).count()).collect(),
    })
}

/// Decodes a container into one cloud file per frame (`ext` is `bin` or `ply`).
pub fn cmd_decode(bitstream: &Path, out: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    if ext != "bin" && ext != "ply" {
        return Err(Error::invalid(format!("unknown cloud format {ext:?}")));
    }
    let stream = Bitstream::from_bytes(&fs::read(bitstream)?)?;
    let clouds = decode_to_clouds(&stream)?;
    clouds
        .iter()
        .enumerate()
        .map(|(t, c)| {
            let path = out.join(frame_name(t, ext));
            save_cloud(c, &path)?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub q_r: i32,
    pub q_b: Vec<i32>,
    pub scenes: usize,
    pub advantage: AdvantageReport,
}

/// RoI and uniform sweeps over `cfg.q_b`, CSV curves and the advantage report.
///
/// `masks[i]` is the mask directory of `manifests[i]`; when absent the masks
/// are computed with [`compute_masks`].
pub fn cmd_eval(manifests: &[PathBuf], masks: &[PathBuf], cfg: &RunConfig, out: &Path) -> Result<EvalReport> {
    if manifests.is_empty() {
        return Err(Error::invalid("eval needs at least one manifest"));
    }
    if !masks.is_empty() && masks.len() != manifests.len() {
        return Err(Error::invalid("give one mask directory per manifest or none"));
    }
    let mut scenes = Vec::with_capacity(manifests.len());
    let mut frame_rate = None;
    for (i, path) in manifests.iter().enumerate() {
        let scene = SceneManifest::load(path)?;
        let clouds = scene.clouds()?;
        let m = match masks.get(i) {
            Some(dir) => load_masks(dir, clouds.len())?,
            None => compute_masks(&scene, cfg)?.0,
        };
        match frame_rate {
            None => frame_rate = Some(scene.manifest.frame_rate),
            Some(r) if r != scene.manifest.frame_rate => {
                return Err(Error::invalid("all manifests must share one frame rate"))
            }
            Some(_) => {}
        }
        scenes.push(Scene {
            id: scene.manifest.sequence_id.clone(),
            clouds,
            masks: m,
        });
    }
    let sweep_cfg = SweepConfig {
        q_r: cfg.q_r,
        q_bs: cfg.q_b.clone(),
        plane: cfg.plane,
        frame_rate: frame_rate.unwrap_or(crate::eval::DEFAULT_FRAME_RATE),
    };
    let started = Instant::now();
    let roi = sweep(&scenes, &sweep_cfg, SweepMode::Roi)?;
    let uniform = sweep(&scenes, &sweep_cfg, SweepMode::Uniform)?;
    info!("eval: two sweeps over {} scenes in {:?}", scenes.len(), started.elapsed());
    let advantage = compare(&roi, &uniform)?;

    let mut rows = Vec::new();
    write_rows_csv(&[roi.rows.clone(), uniform.rows.clone()].concat(), &mut rows)?;
    write_atomic(&out.join("rows.csv"), &rows)?;
    let mut buf = Vec::new();
    write_summary_csv(&roi, cfg.q_r, &mut buf)?;
    write_atomic(&out.join("summary_roi.csv"), &buf)?;
    buf.clear();
    write_summary_csv(&uniform, cfg.q_r, &mut buf)?;
    write_atomic(&out.join("summary_uniform.csv"), &buf)?;
    buf.clear();
    write_long_csv(&[("roi", &roi), ("uniform", &uniform)], &mut buf)?;
    write_atomic(&out.join("curves.csv"), &buf)?;
    let report = EvalReport {
        q_r: cfg.q_r,
        q_b: cfg.q_b.clone(),
        scenes: scenes.len(),
        advantage,
    };
    write_atomic(&out.join("advantage.json"), serde_json::to_string_pretty(&report)?.as_bytes())?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BenchReport {
    pub points: usize,
    pub boxes: usize,
    pub repeats: usize,
    pub indexed_ms_per_box: f64,
    pub brute_ms_per_box: f64,
    /// Indexed time over brute-force time.
    pub ratio: f64,
}

/// Random points over a 100 m square and boxes of road-user sizes.
pub fn bench_scene(seed: u64, points: usize, boxes: usize) -> Result<(PointCloud, Vec<OrientedBox>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..points)
        .map(|_| Point3::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), rng.random_range(-2.0..4.0)))
        .collect();
    let bxs = (0..boxes)
        .map(|k| {
            OrientedBox::new(
                Point3::new(rng.random_range(-45.0..45.0), rng.random_range(-45.0..45.0), rng.random_range(0.0..2.0)),
                [rng.random_range(0.5..8.0), rng.random_range(0.5..3.0), rng.random_range(1.0..3.5)],
                rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
                k as u32 % 10,
            )
        })
        .collect::<Result<_>>()?;
    Ok((PointCloud::new(pts)?, bxs))
}

/// Times the indexed and brute-force points-in-boxes paths on the same scenes.
pub fn cmd_bench_pib(seed: u64, points: usize, boxes: usize, repeats: usize) -> Result<BenchReport> {
    if points == 0 || boxes == 0 || repeats == 0 {
        return Err(Error::invalid("points, boxes and repeats must be positive"));
    }
    let (mut indexed, mut brute) = (0.0, 0.0);
    for r in 0..repeats {
        let (cloud, bxs) = bench_scene(seed.wrapping_add(r as u64), points, boxes)?;
        let t = Instant::now();
        let a = points_in_boxes(&cloud, &bxs);
        indexed += t.elapsed().as_secs_f64();
        let t = Instant::now();
        let b = points_in_boxes_bruteforce(&cloud, &bxs);
        brute += t.elapsed().as_secs_f64();
        if a != b {
            return Err(Error::invalid("indexed and brute-force results differ"));
        }
    }
    let per_box = |s: f64| 1e3 * s / (repeats * boxes) as f64;
    let report = BenchReport {
        points,
        boxes,
        repeats,
        indexed_ms_per_box: per_box(indexed),
        brute_ms_per_box: per_box(brute),
        ratio: indexed / brute,
    };
    info!("bench-pib: {report:?}");
    Ok(report)
}
