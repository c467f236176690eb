use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::Point3;
use crate::{Error, Result};

/// Smallest admissible box dimension in meters.
const MIN_DIMENSION: f64 = 1e-6;

/// Fixed split of a box into six tetrahedra sharing the diagonal from corner
/// 0 to corner 7, one per ordering of the three axes. Indices refer to the
/// ordering documented on [`OrientedBox::corners`].
pub const BOX_TETRAHEDRA: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

/// A 3D box rotated about +z.
///
/// `width` runs along the box-frame x axis, `length` along y and `height`
/// along z. JSON form: `{"center":[x,y,z],"size":[w,l,h],"yaw":..,"class_id":..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxRepr", into = "BoxRepr")]
pub struct OrientedBox {
    pub center: Point3,
    pub width: f64,
    pub length: f64,
    pub height: f64,
    pub yaw: f64,
    pub class_id: u32,
}

#[derive(Serialize, Deserialize)]
struct BoxRepr {
    center: [f64; 3],
    size: [f64; 3],
    #[serde(default)]
    yaw: f64,
    #[serde(default)]
    class_id: u32,
}

impl TryFrom<BoxRepr> for OrientedBox {
    type Error = Error;

    fn try_from(r: BoxRepr) -> Result<Self> {
        OrientedBox::new(Point3::from(r.center), r.size, r.yaw, r.class_id)
    }
}

impl From<OrientedBox> for BoxRepr {
    fn from(b: OrientedBox) -> Self {
        BoxRepr {
            center: b.center.coords.into(),
            size: [b.width, b.length, b.height],
            yaw: b.yaw,
            class_id: b.class_id,
        }
    }
}

impl OrientedBox {
    /// Validates dimensions and wraps `yaw` into `[-π, π]`.
    pub fn new(center: Point3, size: [f64; 3], yaw: f64, class_id: u32) -> Result<Self> {
        if !center.coords.iter().chain(size.iter()).all(|v| v.is_finite()) || !yaw.is_finite() {
            return Err(Error::invalid("box has non-finite parameters"));
        }
        if size.iter().any(|&d| d <= MIN_DIMENSION) {
            return Err(Error::DegenerateBox(size));
        }
        let mut yaw = yaw.rem_euclid(2.0 * PI);
        if yaw > PI {
            yaw -= 2.0 * PI;
        }
        Ok(Self {
            center,
            width: size[0],
            length: size[1],
            height: size[2],
            yaw,
            class_id,
        })
    }

    pub fn size(&self) -> [f64; 3] {
        [self.width, self.length, self.height]
    }

    pub fn volume(&self) -> f64 {
        self.width * self.length * self.height
    }

    /// Radius of the sphere through all eight corners.
    pub fn circumradius(&self) -> f64 {
        0.5 * (self.width * self.width + self.length * self.length + self.height * self.height)
            .sqrt()
    }

    /// Corners in world coordinates. Corner `i` takes the `+` half-extent on
    /// x when bit 0 of `i` is set, on y for bit 1 and on z for bit 2, so
    /// corner 0 is `(-w/2, -l/2, -h/2)` and corner 7 is `(+w/2, +l/2, +h/2)`
    /// before rotation.
    pub fn corners(&self) -> [Point3; 8] {
        let half = Vector3::new(self.width, self.length, self.height) * 0.5;
        let (s, c) = self.yaw.sin_cos();
        std::array::from_fn(|i| {
            let sign = |bit: usize| if i >> bit & 1 == 1 { 1.0 } else { -1.0 };
            let local = Vector3::new(sign(0) * half.x, sign(1) * half.y, sign(2) * half.z);
            Point3::new(
                self.center.x + c * local.x - s * local.y,
                self.center.y + s * local.x + c * local.y,
                self.center.z + local.z,
            )
        })
    }

    /// Expresses a world point in the box frame (inverse yaw about the center).
    pub fn to_local(&self, p: &Point3) -> Vector3<f64> {
        let (s, c) = self.yaw.sin_cos();
        let d = p - self.center;
        Vector3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    /// Box-frame membership test with closed faces.
    pub fn contains(&self, p: &Point3) -> bool {
        let q = self.to_local(p);
        q.x.abs() <= 0.5 * self.width
            && q.y.abs() <= 0.5 * self.length
            && q.z.abs() <= 0.5 * self.height
    }
}

/// Reads a JSON array of boxes.
pub fn boxes_from_json(text: &str) -> Result<Vec<OrientedBox>> {
    Ok(serde_json::from_str(text)?)
}
