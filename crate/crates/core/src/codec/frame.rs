//! Intra coding of one depth image.
//!
//! Segment layout, little-endian: `u32` payload length, then the payload
//! deflated as one stream. Payload:
//!
//! ```text
//! u32            point count N
//! ⌈W·H/8⌉ bytes  occupancy, raster order, MSB first
//! N × u32        point map: 0 outside, else pixel+1, bit 31 set when dropped
//! u32            coefficient byte count
//! ...            coefficients: macroblocks in raster order, the sixteen 4x4
//!                blocks of each in raster order, zigzag scan, signed
//!                exp-Golomb, zero-padded to a byte
//! ```
//!
//! Samples are level-shifted by -32768 before the transform.

use std::io::{Read, Write};

use byteorder::{ByteOrder, LittleEndian};
use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;

use super::entropy::{BitReader, BitWriter, ZIGZAG_4X4};
use super::projection::{DepthImage, PlaneConfig, PointSlot, ProjectionMaps, MACROBLOCK};
use super::qp::QpMap;
use super::transform::{
    check_qp, dct4x4_forward, dequantize_and_inverse_unchecked, quantize_unchecked, Block, Coefficients,
};
use crate::{Error, Result};

const LEVEL_SHIFT: i32 = 32768;
const DROPPED_BIT: u32 = 1 << 31;

/// Decoded frame: the reconstructed image and the stored point map.
#[derive(Debug, Clone)]
pub struct DecodedFrame {
    pub image: DepthImage,
    pub maps: ProjectionMaps,
}

/// Encodes with a per-macroblock QP map.
pub fn encode_frame(image: &DepthImage, qp_map: &QpMap, maps: &ProjectionMaps) -> Result<Vec<u8>> {
    image.validate()?;
    qp_map.check_against(&image.plane)?;
    encode_with(image, maps, |mb| qp_map.get(mb))
}

/// Encodes every macroblock at the same QP.
pub fn encode_frame_uniform(image: &DepthImage, qp: i32, maps: &ProjectionMaps) -> Result<Vec<u8>> {
    image.validate()?;
    let qp = check_qp(qp)?;
    encode_with(image, maps, |_| qp)
}

fn encode_with(image: &DepthImage, maps: &ProjectionMaps, qp_of: impl Fn(usize) -> u8) -> Result<Vec<u8>> {
    let plane = &image.plane;
    let n = maps.slots.len();
    if n > (DROPPED_BIT - 1) as usize || plane.pixels() >= (DROPPED_BIT - 1) as usize {
        return Err(Error::invalid("frame too large for the point map format"));
    }
    let mut payload = Vec::with_capacity(8 + plane.pixels() / 8 + 4 * n);
    put_u32(&mut payload, n as u32);
    payload.extend(pack_bits(&image.occupancy));
    for slot in &maps.slots {
        let code = match *slot {
            PointSlot::Outside => 0,
            PointSlot::Kept(px) => px + 1,
            PointSlot::Dropped(px) => (px + 1) | DROPPED_BIT,
        };
        put_u32(&mut payload, code);
    }

    let samples = padded_samples(image);
    let mut bits = BitWriter::new();
    for mb in 0..plane.macroblocks() {
        let qp = qp_of(mb);
        for block in macroblock_blocks(plane, mb) {
            let z = quantize_unchecked(&dct4x4_forward(&read_block(&samples, plane.width, block)), qp);
            for &k in &ZIGZAG_4X4 {
                bits.put_se(z[k / 4][k % 4]);
            }
        }
    }
    let coeffs = bits.finish();
    put_u32(&mut payload, coeffs.len() as u32);
    payload.extend_from_slice(&coeffs);

    let mut segment = Vec::new();
    put_u32(&mut segment, payload.len() as u32);
    let mut enc = DeflateEncoder::new(segment, Compression::best());
    enc.write_all(&payload)?;
    Ok(enc.finish()?)
}

/// Decodes a segment produced for `plane` with `qp_map`.
pub fn decode_frame(segment: &[u8], plane: &PlaneConfig, qp_map: &QpMap) -> Result<DecodedFrame> {
    plane.validate()?;
    qp_map.check_against(plane)?;
    if segment.len() < 4 {
        return Err(Error::malformed(0, "segment shorter than its length prefix"));
    }
    let raw_len = LittleEndian::read_u32(segment) as usize;
    let mut payload = Vec::with_capacity(raw_len.min(1 << 28));
    DeflateDecoder::new(&segment[4..])
        .take(raw_len as u64 + 1)
        .read_to_end(&mut payload)
        .map_err(|e| Error::malformed(4, format!("deflate stream: {e}")))?;
    if payload.len() != raw_len {
        return Err(Error::malformed(
            0,
            format!("payload is {} bytes, header says {raw_len}", payload.len()),
        ));
    }

    let mut cur = Cursor { bytes: &payload, pos: 0 };
    let n = cur.u32()? as usize;
    let occ_bytes = cur.take(plane.pixels().div_ceil(8))?;
    let occupancy = unpack_bits(occ_bytes, plane.pixels());
    if n > payload.len() / 4 {
        return Err(Error::malformed(0, format!("point count {n} exceeds payload")));
    }
    let mut slots = Vec::with_capacity(n);
    for _ in 0..n {
        let at = cur.pos;
        let code = cur.u32()?;
        let px = (code & !DROPPED_BIT) as usize;
        let slot = match code {
            0 => PointSlot::Outside,
            _ if px == 0 || px > plane.pixels() => {
                return Err(Error::malformed(at, format!("point map entry {code:#x} out of range")))
            }
            _ if code & DROPPED_BIT != 0 => PointSlot::Dropped(px as u32 - 1),
            _ => PointSlot::Kept(px as u32 - 1),
        };
        slots.push(slot);
    }
    let coeff_len = cur.u32()? as usize;
    let coeff_start = cur.pos;
    let coeffs = cur.take(coeff_len)?;
    if cur.pos != payload.len() {
        return Err(Error::malformed(cur.pos, "trailing bytes after coefficients"));
    }

    let mut reader = BitReader::new(coeffs);
    let mut samples = vec![0i32; plane.pixels()];
    for mb in 0..plane.macroblocks() {
        let qp = qp_map.get(mb);
        for block in macroblock_blocks(plane, mb) {
            let mut z: Coefficients = [[0; 4]; 4];
            for &k in &ZIGZAG_4X4 {
                z[k / 4][k % 4] = reader
                    .get_se()
                    .map_err(|e| relocate(e, coeff_start))?;
            }
            write_block(&mut samples, plane.width, block, &dequantize_and_inverse_unchecked(&z, qp));
        }
    }
    let image = DepthImage {
        plane: *plane,
        depth: unshift(&samples, &occupancy),
        occupancy,
    };
    Ok(DecodedFrame {
        image,
        maps: ProjectionMaps { slots },
    })
}

/// Image the decoder will produce, computed without entropy coding.
pub fn quantized_reference(image: &DepthImage, qp_map: &QpMap) -> Result<DepthImage> {
    image.validate()?;
    qp_map.check_against(&image.plane)?;
    let plane = &image.plane;
    let samples = padded_samples(image);
    let mut out = vec![0i32; plane.pixels()];
    for mb in 0..plane.macroblocks() {
        for block in macroblock_blocks(plane, mb) {
            let z = quantize_unchecked(&dct4x4_forward(&read_block(&samples, plane.width, block)), qp_map.get(mb));
            write_block(&mut out, plane.width, block, &dequantize_and_inverse_unchecked(&z, qp_map.get(mb)));
        }
    }
    Ok(DepthImage {
        plane: *plane,
        depth: unshift(&out, &image.occupancy),
        occupancy: image.occupancy.clone(),
    })
}

/// Mean squared depth-code error over pixels occupied in `original`.
pub fn depth_mse(original: &DepthImage, decoded: &DepthImage) -> Result<f64> {
    if original.depth.len() != decoded.depth.len() {
        return Err(Error::LengthMismatch {
            expected: original.depth.len(),
            actual: decoded.depth.len(),
        });
    }
    let (sum, count) = original
        .occupancy
        .iter()
        .zip(original.depth.iter().zip(&decoded.depth))
        .filter(|(&o, _)| o)
        .fold((0.0, 0usize), |(s, c), (_, (&a, &b))| {
            let d = f64::from(a) - f64::from(b);
            (s + d * d, c + 1)
        });
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// Level-shifted samples with unoccupied pixels replaced by the mean of the
/// occupied pixels of their macroblock, else of the whole image.
fn padded_samples(image: &DepthImage) -> Vec<i32> {
    let plane = &image.plane;
    let occupied = image.occupancy.iter().filter(|&&o| o).count() as i64;
    let total: i64 = image
        .depth
        .iter()
        .zip(&image.occupancy)
        .filter(|(_, &o)| o)
        .map(|(&d, _)| i64::from(d))
        .sum();
    let global = if occupied > 0 {
        rounded_mean(total, occupied)
    } else {
        i64::from(LEVEL_SHIFT)
    };
    let mut samples: Vec<i32> = image.depth.iter().map(|&d| i32::from(d) - LEVEL_SHIFT).collect();
    for mb in 0..plane.macroblocks() {
        let pixels = macroblock_pixels(plane, mb);
        let (sum, cnt) = pixels
            .clone()
            .filter(|&p| image.occupancy[p])
            .fold((0i64, 0i64), |(s, c), p| (s + i64::from(image.depth[p]), c + 1));
        if cnt == MACROBLOCK as i64 * MACROBLOCK as i64 {
            continue;
        }
        let fill = if cnt > 0 { rounded_mean(sum, cnt) } else { global } as i32 - LEVEL_SHIFT;
        for p in pixels.filter(|&p| !image.occupancy[p]) {
            samples[p] = fill;
        }
    }
    samples
}

fn rounded_mean(sum: i64, count: i64) -> i64 {
    (sum + count / 2) / count
}

fn unshift(samples: &[i32], occupancy: &[bool]) -> Vec<u16> {
    samples
        .iter()
        .zip(occupancy)
        .map(|(&s, &o)| if o { (s + LEVEL_SHIFT).clamp(0, i32::from(u16::MAX)) as u16 } else { 0 })
        .collect()
}

fn macroblock_pixels(plane: &PlaneConfig, mb: usize) -> impl Iterator<Item = usize> + Clone {
    let x0 = (mb % plane.mb_cols()) * MACROBLOCK;
    let y0 = (mb / plane.mb_cols()) * MACROBLOCK;
    let width = plane.width;
    (0..MACROBLOCK).flat_map(move |dy| (0..MACROBLOCK).map(move |dx| (y0 + dy) * width + x0 + dx))
}

/// Top-left pixel of each 4x4 block of a macroblock.
fn macroblock_blocks(plane: &PlaneConfig, mb: usize) -> impl Iterator<Item = usize> {
    let x0 = (mb % plane.mb_cols()) * MACROBLOCK;
    let y0 = (mb / plane.mb_cols()) * MACROBLOCK;
    let width = plane.width;
    (0..16).map(move |b| (y0 + (b / 4) * 4) * width + x0 + (b % 4) * 4)
}

fn read_block(samples: &[i32], width: usize, origin: usize) -> Block {
    let mut b = [[0; 4]; 4];
    for (r, row) in b.iter_mut().enumerate() {
        row.copy_from_slice(&samples[origin + r * width..origin + r * width + 4]);
    }
    b
}

fn write_block(samples: &mut [i32], width: usize, origin: usize, block: &Block) {
    for (r, row) in block.iter().enumerate() {
        samples[origin + r * width..origin + r * width + 4].copy_from_slice(row);
    }
}

fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i))))
        .collect()
}

fn unpack_bits(bytes: &[u8], n: usize) -> Vec<bool> {
    (0..n).map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1).collect()
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn relocate(e: Error, base: usize) -> Error {
    match e {
        Error::Malformed { offset, message } => Error::malformed(base + offset, message),
        other => other,
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::malformed(self.pos, format!("need {n} bytes, {} left", self.bytes.len() - self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        self.take(4).map(LittleEndian::read_u32)
    }
}
