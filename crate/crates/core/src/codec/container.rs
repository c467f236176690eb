//! Sequence container.
//!
//! Little-endian throughout:
//!
//! ```text
//! "RPCC" u16 version
//! u32 width, u32 height, f64 pixel pitch
//! 4 × [f64; 3]  origin, u axis, v axis, normal
//! f64 depth scale, u16 depth offset
//! u32 frame count L
//! L × (W/16 · H/16) bytes  per-frame QP maps, macroblocks in raster order
//! L × (u32 length, segment)
//! ```

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use std::io::{Cursor, Read};

use super::projection::PlaneConfig;
use super::qp::QpMap;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"RPCC";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Bitstream {
    pub plane: PlaneConfig,
    pub qp_maps: Vec<QpMap>,
    pub segments: Vec<Vec<u8>>,
}

impl Bitstream {
    pub fn frames(&self) -> usize {
        self.segments.len()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.qp_maps.len() != self.segments.len() {
            return Err(Error::LengthMismatch {
                expected: self.segments.len(),
                actual: self.qp_maps.len(),
            });
        }
        self.plane.validate()?;
        let p = &self.plane;
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.write_u16::<LittleEndian>(VERSION)?;
        out.write_u32::<LittleEndian>(p.width as u32)?;
        out.write_u32::<LittleEndian>(p.height as u32)?;
        out.write_f64::<LittleEndian>(p.pixel_pitch)?;
        for v in [p.origin, p.u_axis, p.v_axis, p.normal] {
            for x in v {
                out.write_f64::<LittleEndian>(x)?;
            }
        }
        out.write_f64::<LittleEndian>(p.depth_scale)?;
        out.write_u16::<LittleEndian>(p.depth_offset)?;
        out.write_u32::<LittleEndian>(self.segments.len() as u32)?;
        for map in &self.qp_maps {
            map.check_against(p)?;
            out.extend_from_slice(map.values());
        }
        for seg in &self.segments {
            out.write_u32::<LittleEndian>(seg.len() as u32)?;
            out.extend_from_slice(seg);
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor::new(bytes);
        let at = |r: &Cursor<&[u8]>| r.position() as usize;
        let truncated = |r: &Cursor<&[u8]>| Error::malformed(r.position() as usize, "truncated container");

        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| truncated(&r))?;
        if &magic != MAGIC {
            return Err(Error::malformed(0, "missing RPCC magic"));
        }
        let version = r.read_u16::<LittleEndian>().map_err(|_| truncated(&r))?;
        if version != VERSION {
            return Err(Error::malformed(4, format!("unsupported version {version}")));
        }
        let header_at = at(&r);
        let mut f64s = [0.0; 14];
        let width = r.read_u32::<LittleEndian>().map_err(|_| truncated(&r))? as usize;
        let height = r.read_u32::<LittleEndian>().map_err(|_| truncated(&r))? as usize;
        for x in f64s.iter_mut().take(13) {
            *x = r.read_f64::<LittleEndian>().map_err(|_| truncated(&r))?;
        }
        f64s[13] = r.read_f64::<LittleEndian>().map_err(|_| truncated(&r))?;
        let depth_offset = r.read_u16::<LittleEndian>().map_err(|_| truncated(&r))?;
        let v3 = |i: usize| [f64s[i], f64s[i + 1], f64s[i + 2]];
        let plane = PlaneConfig {
            origin: v3(1),
            u_axis: v3(4),
            v_axis: v3(7),
            normal: v3(10),
            pixel_pitch: f64s[0],
            width,
            height,
            depth_scale: f64s[13],
            depth_offset,
        };
        plane
            .validate()
            .map_err(|e| Error::malformed(header_at, format!("bad plane: {e}")))?;

        let frames = r.read_u32::<LittleEndian>().map_err(|_| truncated(&r))? as usize;
        let b = plane.macroblocks();
        if frames.saturating_mul(b + 4) > bytes.len() {
            return Err(Error::malformed(at(&r) - 4, format!("frame count {frames} exceeds stream size")));
        }
        let mut qp_maps = Vec::with_capacity(frames);
        for _ in 0..frames {
            let start = at(&r);
            let mut qps = vec![0u8; b];
            r.read_exact(&mut qps).map_err(|_| truncated(&r))?;
            let map = QpMap::from_values(plane.mb_cols(), plane.mb_rows(), qps)
                .map_err(|e| Error::malformed(start, e.to_string()))?;
            qp_maps.push(map);
        }
        let mut segments = Vec::with_capacity(frames);
        for _ in 0..frames {
            let len = r.read_u32::<LittleEndian>().map_err(|_| truncated(&r))? as usize;
            let start = at(&r);
            if start + len > bytes.len() {
                return Err(Error::malformed(start - 4, format!("segment length {len} overruns stream")));
            }
            segments.push(bytes[start..start + len].to_vec());
            r.set_position((start + len) as u64);
        }
        if at(&r) != bytes.len() {
            return Err(Error::malformed(at(&r), "trailing bytes after last segment"));
        }
        Ok(Self { plane, qp_maps, segments })
    }
}
