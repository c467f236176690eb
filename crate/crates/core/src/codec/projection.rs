//! Orthographic projection of a cloud onto a depth image and back.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::geometry::{Point3, PointCloud};
use crate::{Error, Result};

pub const MACROBLOCK: usize = 16;

/// Projection plane and depth quantization.
///
/// Pixel `(col, row)` is centered at
/// `origin + (col - width/2)·pitch·u + (row - height/2)·pitch·v`, so the
/// origin sits on the center of pixel `(width/2, height/2)`. Depth is the
/// signed distance along `normal`, stored as `round(d / depth_scale) + depth_offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlaneConfig {
    pub origin: [f64; 3],
    pub u_axis: [f64; 3],
    pub v_axis: [f64; 3],
    pub normal: [f64; 3],
    pub pixel_pitch: f64,
    pub width: usize,
    pub height: usize,
    /// Meters per depth unit.
    pub depth_scale: f64,
    pub depth_offset: u16,
}

impl Default for PlaneConfig {
    /// Bird's-eye view looking down: 512 × 512 pixels of 0.2 m, depth along
    /// -z at 1.5625 mm per unit over ±51.2 m around the origin.
    fn default() -> Self {
        Self {
            origin: [0.0, 0.0, 0.0],
            u_axis: [1.0, 0.0, 0.0],
            v_axis: [0.0, 1.0, 0.0],
            normal: [0.0, 0.0, -1.0],
            pixel_pitch: 0.2,
            width: 512,
            height: 512,
            depth_scale: 0.0015625,
            depth_offset: 32768,
        }
    }
}

impl PlaneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.width % MACROBLOCK != 0 || self.height % MACROBLOCK != 0 {
            return Err(Error::invalid(format!(
                "image {}x{} must be a nonzero multiple of {MACROBLOCK}",
                self.width, self.height
            )));
        }
        if self.width > 1 << 15 || self.height > 1 << 15 {
            return Err(Error::invalid("image dimensions above 32768"));
        }
        if !(self.pixel_pitch > 0.0 && self.pixel_pitch.is_finite())
            || !(self.depth_scale > 0.0 && self.depth_scale.is_finite())
        {
            return Err(Error::invalid("pixel pitch and depth scale must be positive"));
        }
        let (u, v, n) = self.axes();
        let ortho = [u.dot(&v), u.dot(&n), v.dot(&n)];
        let unit = [u.norm() - 1.0, v.norm() - 1.0, n.norm() - 1.0];
        if ortho.iter().chain(&unit).any(|x| x.abs() > 1e-9 || !x.is_finite())
            || self.origin.iter().any(|x| !x.is_finite())
        {
            return Err(Error::invalid("projection axes must be orthonormal"));
        }
        Ok(())
    }

    fn axes(&self) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        (
            Vector3::from(self.u_axis),
            Vector3::from(self.v_axis),
            Vector3::from(self.normal),
        )
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn mb_cols(&self) -> usize {
        self.width / MACROBLOCK
    }

    pub fn mb_rows(&self) -> usize {
        self.height / MACROBLOCK
    }

    pub fn macroblocks(&self) -> usize {
        self.mb_cols() * self.mb_rows()
    }

    /// Macroblock holding pixel `pixel` (the 16 × 16 tiling map).
    pub fn macroblock_of(&self, pixel: usize) -> usize {
        let (col, row) = (pixel % self.width, pixel / self.width);
        (row / MACROBLOCK) * self.mb_cols() + col / MACROBLOCK
    }

    /// Pixel index and depth code for a point, `None` outside the footprint
    /// or the 16-bit depth range.
    pub fn locate(&self, p: &Point3) -> Option<(usize, u16)> {
        let (u, v, n) = self.axes();
        let d = p - Point3::from(self.origin);
        let col = (d.dot(&u) / self.pixel_pitch + 0.5).floor() + (self.width / 2) as f64;
        let row = (d.dot(&v) / self.pixel_pitch + 0.5).floor() + (self.height / 2) as f64;
        if !(col >= 0.0 && row >= 0.0 && col < self.width as f64 && row < self.height as f64) {
            return None;
        }
        let depth = (d.dot(&n) / self.depth_scale).round() + f64::from(self.depth_offset);
        if !(0.0..=f64::from(u16::MAX)).contains(&depth) {
            return None;
        }
        Some((row as usize * self.width + col as usize, depth as u16))
    }

    /// 3D position of a pixel center at a given depth code.
    pub fn unproject(&self, pixel: usize, depth: u16) -> Point3 {
        let (u, v, n) = self.axes();
        let a = (pixel % self.width) as f64 - (self.width / 2) as f64;
        let b = (pixel / self.width) as f64 - (self.height / 2) as f64;
        let d = (f64::from(depth) - f64::from(self.depth_offset)) * self.depth_scale;
        Point3::from(self.origin) + u * (a * self.pixel_pitch) + v * (b * self.pixel_pitch) + n * d
    }
}

/// Quantized depth raster with occupancy.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub plane: PlaneConfig,
    pub depth: Vec<u16>,
    pub occupancy: Vec<bool>,
}

impl DepthImage {
    pub fn empty(plane: PlaneConfig) -> Self {
        Self {
            depth: vec![0; plane.pixels()],
            occupancy: vec![false; plane.pixels()],
            plane,
        }
    }

    pub fn width(&self) -> usize {
        self.plane.width
    }

    pub fn height(&self) -> usize {
        self.plane.height
    }

    pub fn occupied(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }

    pub fn validate(&self) -> Result<()> {
        self.plane.validate()?;
        let n = self.plane.pixels();
        if self.depth.len() != n || self.occupancy.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: self.depth.len().min(self.occupancy.len()),
            });
        }
        Ok(())
    }
}

/// Where a source point landed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSlot {
    /// Outside the image footprint or the depth range.
    Outside,
    /// Owns its pixel.
    Kept(u32),
    /// Lost its pixel to a nearer point.
    Dropped(u32),
}

impl PointSlot {
    /// Target pixel before nearest-wins resolution.
    pub fn pixel(&self) -> Option<usize> {
        match *self {
            PointSlot::Kept(p) | PointSlot::Dropped(p) => Some(p as usize),
            PointSlot::Outside => None,
        }
    }
}

/// Point-to-pixel map of one projection; the pixel-to-macroblock map is the
/// fixed tiling given by [`PlaneConfig::macroblock_of`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionMaps {
    pub slots: Vec<PointSlot>,
}

impl ProjectionMaps {
    pub fn is_kept(&self, i: usize) -> bool {
        matches!(self.slots.get(i), Some(PointSlot::Kept(_)))
    }

    pub fn dropped(&self) -> Vec<usize> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| !matches!(s, PointSlot::Kept(_)))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub image: DepthImage,
    pub maps: ProjectionMaps,
    /// Points that are not represented by a pixel (outside or overwritten).
    pub dropped: Vec<usize>,
}

/// Projects a cloud; per pixel the smallest depth code wins, ties going to
/// the lower point index.
pub fn project(cloud: &PointCloud, plane: &PlaneConfig) -> Result<Projection> {
    plane.validate()?;
    if cloud.is_empty() {
        return Err(Error::Empty("cannot project an empty cloud"));
    }
    let mut image = DepthImage::empty(*plane);
    let mut owner = vec![usize::MAX; plane.pixels()];
    let mut located = Vec::with_capacity(cloud.len());
    for (i, p) in cloud.points().iter().enumerate() {
        let hit = plane.locate(p);
        if let Some((px, depth)) = hit {
            if owner[px] == usize::MAX || depth < image.depth[px] {
                owner[px] = i;
                image.depth[px] = depth;
                image.occupancy[px] = true;
            }
        }
        located.push(hit);
    }
    let slots: Vec<PointSlot> = located
        .iter()
        .enumerate()
        .map(|(i, hit)| match hit {
            None => PointSlot::Outside,
            Some((px, _)) if owner[*px] == i => PointSlot::Kept(*px as u32),
            Some((px, _)) => PointSlot::Dropped(*px as u32),
        })
        .collect();
    if !slots.iter().any(|s| matches!(s, PointSlot::Kept(_))) {
        return Err(Error::OutsideFootprint);
    }
    let maps = ProjectionMaps { slots };
    let dropped = maps.dropped();
    Ok(Projection { image, maps, dropped })
}

/// One point per occupied pixel, at the pixel center, in raster order.
pub fn reconstruct(image: &DepthImage) -> PointCloud {
    let points = image
        .occupancy
        .iter()
        .enumerate()
        .filter(|(_, &o)| o)
        .map(|(px, _)| image.plane.unproject(px, image.depth[px]))
        .collect();
    PointCloud::new(points).unwrap_or_default()
}
