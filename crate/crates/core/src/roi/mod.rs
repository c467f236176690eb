//! RoI detection: mixtures fitted to labeled objects, bird's-eye heatmaps,
//! ground removal and mask propagation between frames.

pub mod gmm;
mod ground;
mod heatmap;
mod mask;
mod pipeline;
mod propagate;

pub use gmm::{fit_gmm, fit_gmm_traced, project_gmm, Gmm2, Gmm3, GmmFit, GmmParams};
pub use ground::{ground_mask, ground_mask_with, GroundParams};
pub use heatmap::{
    binarize_heatmap, mask_from_grid, normalized_field, rasterize_heatmap, BinaryGrid,
    GridGeometry, RoiHeatmap,
};
pub use mask::{compose_roi, RoiMask};
pub use pipeline::{box_mixtures, box_seed, roi_from_boxes, roi_from_boxes_detailed, RoiParams, RoiProducts};
pub use propagate::{propagate_mask, DEFAULT_PROPAGATION_RADIUS};
