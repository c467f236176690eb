//! Projection-based depth-image codec with per-macroblock QP control.

pub mod container;
pub mod entropy;
pub mod frame;
pub mod projection;
pub mod qp;
pub mod sequence;
pub mod transform;

pub use container::Bitstream;
pub use frame::{decode_frame, depth_mse, encode_frame, encode_frame_uniform, quantized_reference, DecodedFrame};
pub use projection::{project, reconstruct, DepthImage, PlaneConfig, PointSlot, Projection, ProjectionMaps, MACROBLOCK};
pub use qp::{build_qp_map, solve_indicator, QpMap, RoiMacroblockIndicator};
pub use sequence::{decode_sequence, decode_to_clouds, encode_sequence, EncodedSequence};
pub use transform::{dct4x4_forward, dequantize_and_inverse, quantize, Block, Coefficients, MAX_QP};
