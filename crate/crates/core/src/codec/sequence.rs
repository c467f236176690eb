//! Per-frame project → indicator → QP map → encode, and the inverse.

use rayon::prelude::*;

use super::container::Bitstream;
use super::frame::{decode_frame, encode_frame, DecodedFrame};
use super::projection::{project, reconstruct, PlaneConfig, ProjectionMaps};
use super::qp::{build_qp_map, solve_indicator, QpMap, RoiMacroblockIndicator};
use crate::geometry::PointCloud;
use crate::roi::RoiMask;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct EncodedSequence {
    pub bitstream: Bitstream,
    /// Serialized container size in bits.
    pub total_bits: usize,
    /// Segment size in bits, per frame.
    pub frame_bits: Vec<usize>,
    pub indicator: RoiMacroblockIndicator,
    pub maps: Vec<ProjectionMaps>,
}

/// Encodes every frame; without masks all macroblocks get `q_b`.
pub fn encode_sequence(
    clouds: &[PointCloud],
    masks: Option<&[RoiMask]>,
    q_r: i32,
    q_b: i32,
    plane: &PlaneConfig,
) -> Result<EncodedSequence> {
    plane.validate()?;
    if let Some(m) = masks {
        if m.len() != clouds.len() {
            return Err(Error::LengthMismatch {
                expected: clouds.len(),
                actual: m.len(),
            });
        }
    }
    let frames: Vec<(QpMap, Vec<u8>, Vec<bool>, ProjectionMaps)> = clouds
        .par_iter()
        .enumerate()
        .map(|(t, cloud)| {
            let proj = project(cloud, plane)?;
            let column = match masks {
                Some(m) => solve_indicator(&m[t], &proj.maps, plane)?,
                None => vec![false; plane.macroblocks()],
            };
            let qp = build_qp_map(&column, plane, q_r, q_b)?;
            let seg = encode_frame(&proj.image, &qp, &proj.maps)?;
            Ok((qp, seg, column, proj.maps))
        })
        .collect::<Result<_>>()?;

    let mut indicator = RoiMacroblockIndicator::new(plane.macroblocks());
    let mut bitstream = Bitstream {
        plane: *plane,
        qp_maps: Vec::with_capacity(frames.len()),
        segments: Vec::with_capacity(frames.len()),
    };
    let mut maps = Vec::with_capacity(frames.len());
    for (qp, seg, column, m) in frames {
        indicator.push(column)?;
        bitstream.qp_maps.push(qp);
        bitstream.segments.push(seg);
        maps.push(m);
    }
    let frame_bits = bitstream.segments.iter().map(|s| s.len() * 8).collect();
    let total_bits = bitstream.to_bytes()?.len() * 8;
    Ok(EncodedSequence {
        bitstream,
        total_bits,
        frame_bits,
        indicator,
        maps,
    })
}

pub fn decode_sequence(bitstream: &Bitstream) -> Result<Vec<DecodedFrame>> {
    if bitstream.qp_maps.len() != bitstream.segments.len() {
        return Err(Error::LengthMismatch {
            expected: bitstream.segments.len(),
            actual: bitstream.qp_maps.len(),
        });
    }
    bitstream
        .segments
        .par_iter()
        .zip(&bitstream.qp_maps)
        .map(|(seg, qp)| decode_frame(seg, &bitstream.plane, qp))
        .collect()
}

/// Decoded frames as point clouds, one point per occupied pixel.
pub fn decode_to_clouds(bitstream: &Bitstream) -> Result<Vec<PointCloud>> {
    Ok(decode_sequence(bitstream)?
        .iter()
        .enumerate()
        .map(|(t, f)| {
            let mut c = reconstruct(&f.image);
            c.frame_index = t as u32;
            c
        })
        .collect())
}
