use log::debug;
use rayon::prelude::*;

use super::{
    binarize_heatmap, compose_roi, fit_gmm, ground_mask_with, mask_from_grid, rasterize_heatmap,
    BinaryGrid, Gmm2, GmmParams, GridGeometry, GroundParams, RoiHeatmap, RoiMask,
};
use crate::geometry::{points_in_boxes, OrientedBox, PointCloud};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiParams {
    /// Mixture components per object.
    pub components: usize,
    pub gamma: f64,
    pub grid: GridGeometry,
    pub classes: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub reg_covar: f64,
    pub ground: GroundParams,
}

impl Default for RoiParams {
    fn default() -> Self {
        Self {
            components: 5,
            gamma: 0.4,
            grid: GridGeometry::default(),
            classes: 10,
            max_iter: 100,
            tol: 1e-6,
            reg_covar: super::gmm::DEFAULT_REG_COVAR,
            ground: GroundParams::default(),
        }
    }
}

/// Intermediate products of [`roi_from_boxes_detailed`].
#[derive(Debug, Clone)]
pub struct RoiProducts {
    pub heatmap: RoiHeatmap,
    pub grid: BinaryGrid,
    pub heatmap_mask: RoiMask,
    pub foreground: RoiMask,
    pub mask: RoiMask,
}

/// Deterministic EM seed derived from a box center.
pub fn box_seed(b: &OrientedBox) -> u64 {
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for v in [b.center.x, b.center.y, b.center.z] {
        h ^= v.to_bits();
        h = splitmix64(h);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Projected per-box mixtures tagged with their class, skipping empty boxes.
pub fn box_mixtures(cloud: &PointCloud, boxes: &[OrientedBox], params: &RoiParams) -> Result<Vec<(Gmm2, u32)>> {
    let inside = points_in_boxes(cloud, boxes);
    let fitted: Vec<Option<(Gmm2, u32)>> = boxes
        .par_iter()
        .zip(inside.par_iter())
        .map(|(b, ids)| -> Result<Option<(Gmm2, u32)>> {
            if ids.is_empty() {
                return Ok(None);
            }
            let pts: Vec<_> = ids.iter().map(|&i| cloud.points()[i]).collect();
            let gmm = fit_gmm(
                &pts,
                &GmmParams {
                    components: params.components,
                    max_iter: params.max_iter,
                    tol: params.tol,
                    reg_covar: params.reg_covar,
                    seed: box_seed(b),
                    ..GmmParams::default()
                },
            )?;
            Ok(Some((gmm.project_xy(), b.class_id)))
        })
        .collect::<Result<_>>()?;
    Ok(fitted.into_iter().flatten().collect())
}

/// End-to-end RoI labeling from boxes: points in boxes, per-box mixture fit,
/// x-y projection, heatmap, binarization, point lookup, AND foreground.
pub fn roi_from_boxes(cloud: &PointCloud, boxes: &[OrientedBox], params: &RoiParams) -> Result<RoiMask> {
    roi_from_boxes_detailed(cloud, boxes, params).map(|p| p.mask)
}

pub fn roi_from_boxes_detailed(
    cloud: &PointCloud,
    boxes: &[OrientedBox],
    params: &RoiParams,
) -> Result<RoiProducts> {
    let started = std::time::Instant::now();
    let gmms = box_mixtures(cloud, boxes, params)?;
    debug!("fitted {} mixtures in {:?}", gmms.len(), started.elapsed());
    let heatmap = rasterize_heatmap(&gmms, &params.grid, params.classes)?;
    let grid = binarize_heatmap(&heatmap, params.gamma)?;
    let heatmap_mask = mask_from_grid(cloud, &grid);
    let foreground = ground_mask_with(cloud, &params.ground);
    let mask = compose_roi(&heatmap_mask, &foreground)?;
    debug!("roi labeling took {:?}, {} of {} points", started.elapsed(), mask.count(), mask.len());
    Ok(RoiProducts {
        heatmap,
        grid,
        heatmap_mask,
        foreground,
        mask,
    })
}
