use super::RoiMask;
use crate::geometry::{transform_cloud, PointCloud, Pose, SpatialIndex};
use crate::{Error, Result};

/// Default matching radius when carrying a mask to another frame, in meters.
pub const DEFAULT_PROPAGATION_RADIUS: f64 = 0.1;

/// Carries a RoI mask from one frame to another using the frames' ego poses.
///
/// Source RoI points are mapped into the target sensor frame by
/// `target_pose⁻¹ ∘ source_pose`; a target point is RoI when some mapped
/// source RoI point lies within `radius` of it.
pub fn propagate_mask(
    mask: &RoiMask,
    source: &PointCloud,
    source_pose: &Pose,
    target: &PointCloud,
    target_pose: &Pose,
    radius: f64,
) -> Result<RoiMask> {
    if mask.len() != source.len() {
        return Err(Error::LengthMismatch {
            expected: source.len(),
            actual: mask.len(),
        });
    }
    let roi: Vec<usize> = mask.indices().collect();
    if roi.is_empty() {
        return Ok(RoiMask::zeros(target.len()));
    }
    let relative = target_pose.inverse().compose(source_pose);
    let moved = transform_cloud(&source.select(&roi), &relative);
    let index = SpatialIndex::build(&moved);
    Ok(RoiMask::new(
        target.points().iter().map(|p| index.any_within(p, radius)).collect(),
    ))
}
