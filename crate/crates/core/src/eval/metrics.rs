//! Geometric fidelity metrics.

use rayon::prelude::*;

use crate::geometry::{Point3, PointCloud, SpatialIndex};
use crate::roi::RoiMask;
use crate::{Error, Result};

/// PSNR reported when the error is below [`MSE_FLOOR`].
pub const PSNR_CAP_DB: f64 = 200.0;
pub const MSE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P2pDistance {
    /// Symmetric mean squared nearest-neighbour distance, m².
    pub mse: f64,
    pub psnr_db: f64,
}

/// Mean squared distance from each point of `from` to its nearest point in `to`.
pub fn one_way_mse(from: &[Point3], to: &SpatialIndex) -> Result<f64> {
    if from.is_empty() || to.is_empty() {
        return Err(Error::Empty("nearest-neighbour error needs two nonempty clouds"));
    }
    let sum: f64 = from
        .par_iter()
        .map(|p| to.nearest(p).map_or(0.0, |(_, d2)| d2))
        .sum();
    Ok(sum / from.len() as f64)
}

/// Symmetric point-to-point error with the diagonal of `a`'s bounding box as peak.
pub fn p2p_distance(a: &PointCloud, b: &PointCloud) -> Result<P2pDistance> {
    let (lo, hi) = a.bounds().ok_or(Error::Empty("p2p distance of an empty cloud"))?;
    p2p_distance_with_peak(a, b, (hi - lo).norm())
}

pub fn p2p_distance_with_peak(a: &PointCloud, b: &PointCloud, peak: f64) -> Result<P2pDistance> {
    let ab = one_way_mse(a.points(), &SpatialIndex::build(b))?;
    let ba = one_way_mse(b.points(), &SpatialIndex::build(a))?;
    let mse = 0.5 * (ab + ba);
    Ok(P2pDistance { mse, psnr_db: psnr(mse, peak) })
}

pub fn psnr(mse: f64, peak: f64) -> f64 {
    if mse < MSE_FLOOR || peak <= 0.0 {
        PSNR_CAP_DB
    } else {
        (10.0 * (peak * peak / mse).log10()).min(PSNR_CAP_DB)
    }
}

/// Mean squared distance from the masked points of `original` to their
/// nearest neighbours in `reconstructed`.
pub fn roi_restricted_error(original: &PointCloud, reconstructed: &PointCloud, mask: &RoiMask) -> Result<f64> {
    if mask.len() != original.len() {
        return Err(Error::LengthMismatch {
            expected: original.len(),
            actual: mask.len(),
        });
    }
    let roi: Vec<Point3> = mask.indices().map(|i| original.points()[i]).collect();
    if roi.is_empty() {
        return Err(Error::Empty("RoI mask selects no points"));
    }
    one_way_mse(&roi, &SpatialIndex::build(reconstructed))
}
