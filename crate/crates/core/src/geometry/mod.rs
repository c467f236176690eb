//! Point clouds, rigid poses and spatial queries.

mod bbox;
pub mod io;
mod kdtree;
mod pib;

pub use bbox::{boxes_from_json, OrientedBox, BOX_TETRAHEDRA};
pub use kdtree::SpatialIndex;
pub use pib::{points_in_boxes, points_in_boxes_bruteforce, points_in_boxes_with_index, BoxHull};

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;

/// Rigid transform `p -> R p + t` mapping a sensor frame into the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Rotation3<f64>,
    translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose from a raw rotation matrix, checking orthonormality and
    /// a positive determinant to 1e-9.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if rotation.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("pose contains non-finite values"));
        }
        let gram = rotation.transpose() * rotation;
        if (gram - Matrix3::identity()).abs().max() > 1e-9 {
            return Err(Error::invalid("pose rotation is not orthonormal"));
        }
        if (rotation.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("pose rotation has determinant != +1"));
        }
        Ok(Self {
            rotation: Rotation3::from_matrix_unchecked(rotation),
            translation,
        })
    }

    /// Planar motion: a yaw about +z followed by a translation.
    pub fn from_yaw_translation(yaw: f64, translation: Vector3<f64>) -> Self {
        Self {
            rotation: Rotation3::from_axis_angle(&Vector3::z_axis(), yaw),
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        self.rotation.matrix()
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// Heading of the rotated x axis in the x-y plane.
    pub fn yaw(&self) -> f64 {
        let m = self.rotation.matrix();
        m[(1, 0)].atan2(m[(0, 0)])
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rotation = self.rotation.inverse();
        Self {
            rotation,
            translation: -(rotation * self.translation),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Pose) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PoseRepr {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

impl Serialize for Pose {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = self.rotation.matrix();
        let mut rotation = [[0.0; 3]; 3];
        for (r, row) in rotation.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = m[(r, c)];
            }
        }
        PoseRepr {
            rotation,
            translation: self.translation.into(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PoseRepr::deserialize(d)?;
        let m = Matrix3::from_fn(|r, c| repr.rotation[r][c]);
        Pose::new(m, Vector3::from(repr.translation)).map_err(serde::de::Error::custom)
    }
}

/// An ordered set of points with optional per-point intensity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    intensity: Option<Vec<f32>>,
    pub frame_index: u32,
    pub pose: Pose,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.coords.iter().all(|v| v.is_finite())) {
            return Err(Error::invalid(format!("point {i} has a non-finite coordinate")));
        }
        Ok(Self {
            points,
            ..Default::default()
        })
    }

    pub fn with_intensity(mut self, intensity: Vec<f32>) -> Result<Self> {
        if intensity.len() != self.points.len() {
            return Err(Error::LengthMismatch {
                expected: self.points.len(),
                actual: intensity.len(),
            });
        }
        self.intensity = Some(intensity);
        Ok(self)
    }

    pub fn with_frame(mut self, frame_index: u32, pose: Pose) -> Self {
        self.frame_index = frame_index;
        self.pose = pose;
        self
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn intensity(&self) -> Option<&[f32]> {
        self.intensity.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Copies the points selected by `indices`, keeping intensities aligned.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            intensity: self
                .intensity
                .as_ref()
                .map(|v| indices.iter().map(|&i| v[i]).collect()),
            frame_index: self.frame_index,
            pose: self.pose,
        }
    }

    /// Axis-aligned bounds, `None` for an empty cloud.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }
}

/// Maps every point through `pose`. Intensities, frame index and order are
/// preserved; the cloud's own pose field is left untouched.
pub fn transform_cloud(cloud: &PointCloud, pose: &Pose) -> PointCloud {
    PointCloud {
        points: cloud.points.iter().map(|p| pose.apply(p)).collect(),
        intensity: cloud.intensity.clone(),
        frame_index: cloud.frame_index,
        pose: cloud.pose,
    }
}
