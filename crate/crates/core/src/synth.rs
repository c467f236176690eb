//! Deterministic synthetic driving scenes.
//!
//! A static world holds a noisy ground plane and box-shaped objects whose
//! points come from a planted two-component Gaussian mixture clipped to the
//! box. The ego vehicle drives along +x; each frame observes the world in
//! its own coordinates with fresh per-point jitter.

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::{OrientedBox, Point3, PointCloud, Pose};
use crate::{Error, Result};

/// Label of ground points in [`SyntheticFrame::labels`].
pub const GROUND_LABEL: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    pub frames: usize,
    pub objects: usize,
    /// Ground covers `[-extent, extent]²` around the start pose.
    pub ground_extent: f64,
    pub ground_points: usize,
    pub object_points: usize,
    /// Planted component standard deviation as a fraction of the box half-size.
    pub object_spread: f64,
    pub ground_noise: f64,
    /// Per-frame measurement noise, meters.
    pub jitter: f64,
    /// Meters per second along +x.
    pub ego_speed: f64,
    pub frame_rate: f64,
    pub classes: u32,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            frames: 40,
            objects: 8,
            ground_extent: 40.0,
            ground_points: 30_000,
            object_points: 600,
            object_spread: 0.3,
            ground_noise: 0.02,
            jitter: 0.01,
            ego_speed: 5.0,
            frame_rate: 20.0,
            classes: 10,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::invalid("scene needs at least one frame"));
        }
        if !(self.ground_extent > 5.0 && self.ground_extent.is_finite()) {
            return Err(Error::invalid("ground extent must exceed 5 m"));
        }
        if self.ground_points == 0 && self.objects == 0 {
            return Err(Error::invalid("scene would be empty"));
        }
        if self.objects > 0 && self.object_points == 0 {
            return Err(Error::invalid("objects need points"));
        }
        if !(self.object_spread > 0.0) || self.ground_noise < 0.0 || self.jitter < 0.0 {
            return Err(Error::invalid("spread must be positive and noise non-negative"));
        }
        if !(self.frame_rate > 0.0) || !self.ego_speed.is_finite() || self.classes == 0 {
            return Err(Error::invalid("frame rate and class count must be positive"));
        }
        Ok(())
    }
}

/// Object in world coordinates with its planted mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedObject {
    pub bbox: OrientedBox,
    pub means: [Point3; 2],
    /// Per-axis standard deviations in the box frame.
    pub sigma: Vector3<f64>,
}

#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    /// Ego-frame points; `pose` maps them into the world.
    pub cloud: PointCloud,
    pub boxes: Vec<OrientedBox>,
    /// [`GROUND_LABEL`] or `1 + object index`.
    pub labels: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub objects: Vec<PlantedObject>,
    pub frames: Vec<SyntheticFrame>,
}

/// Box sizes (x, y, z) per class, cycled by `class_id`.
const CLASS_SIZES: [[f64; 3]; 5] = [
    [4.5, 1.9, 1.6],
    [0.8, 0.7, 1.8],
    [8.0, 2.6, 3.2],
    [1.8, 0.7, 1.4],
    [2.2, 1.0, 1.1],
];

/// Points sit at least this high above the box floor.
const GROUND_CLEARANCE: f64 = 0.3;

pub fn generate_scene(seed: u64, params: &SceneParams) -> Result<SyntheticScene> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objects = place_objects(&mut rng, params)?;

    let ground_noise = Normal::new(0.0, params.ground_noise).map_err(|e| Error::invalid(e.to_string()))?;
    let mut world = Vec::with_capacity(params.ground_points + objects.len() * params.object_points);
    let mut labels = Vec::with_capacity(world.capacity());
    let e = params.ground_extent;
    for _ in 0..params.ground_points {
        let (x, y) = (rng.random_range(-e..e), rng.random_range(-e..e));
        world.push(Point3::new(x, y, ground_noise.sample(&mut rng)));
        labels.push(GROUND_LABEL);
    }
    for (k, obj) in objects.iter().enumerate() {
        for p in sample_object(&mut rng, obj, params.object_points)? {
            world.push(p);
            labels.push(k as u32 + 1);
        }
    }

    let jitter = Normal::new(0.0, params.jitter).map_err(|e| Error::invalid(e.to_string()))?;
    let mut frames = Vec::with_capacity(params.frames);
    for t in 0..params.frames {
        let pose = ego_pose(t, params);
        let to_ego = pose.inverse();
        let points = world
            .iter()
            .map(|p| {
                let noisy = p + Vector3::new(jitter.sample(&mut rng), jitter.sample(&mut rng), jitter.sample(&mut rng));
                to_ego.apply(&noisy)
            })
            .collect();
        let cloud = PointCloud::new(points)?.with_frame(t as u32, pose.clone());
        let boxes = objects
            .iter()
            .map(|o| {
                OrientedBox::new(
                    to_ego.apply(&o.bbox.center),
                    o.bbox.size(),
                    o.bbox.yaw - pose.yaw(),
                    o.bbox.class_id,
                )
            })
            .collect::<Result<_>>()?;
        frames.push(SyntheticFrame {
            cloud,
            boxes,
            labels: labels.clone(),
        });
    }
    Ok(SyntheticScene { objects, frames })
}

/// Straight drive along +x starting at the world origin.
pub fn ego_pose(frame: usize, params: &SceneParams) -> Pose {
    let x = params.ego_speed * frame as f64 / params.frame_rate;
    Pose::from_yaw_translation(0.0, Vector3::new(x, 0.0, 0.0))
}

fn place_objects(rng: &mut ChaCha8Rng, params: &SceneParams) -> Result<Vec<PlantedObject>> {
    let mut out: Vec<PlantedObject> = Vec::with_capacity(params.objects);
    let r_max = 0.8 * params.ground_extent;
    let mut attempts = 0;
    while out.len() < params.objects {
        attempts += 1;
        if attempts > 1000 * params.objects.max(1) {
            return Err(Error::invalid("could not place objects without overlap"));
        }
        let class_id = rng.random_range(0..params.classes);
        let base = CLASS_SIZES[class_id as usize % CLASS_SIZES.len()];
        let scale = rng.random_range(0.9..1.1);
        let size = [base[0] * scale, base[1] * scale, base[2] * scale];
        let r = rng.random_range(6.0..r_max);
        let phi = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let c = Vector2::new(r * phi.cos(), r * phi.sin());
        let reach = 0.5 * size[0].hypot(size[1]);
        let clear = out.iter().all(|o| {
            let oc = Vector2::new(o.bbox.center.x, o.bbox.center.y);
            (oc - c).norm() > reach + 0.5 * o.bbox.width.hypot(o.bbox.length) + 1.0
        });
        if !clear {
            continue;
        }
        let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let bbox = OrientedBox::new(Point3::new(c.x, c.y, size[2] / 2.0), size, yaw, class_id)?;
        let half = Vector3::new(size[0] / 2.0, size[1] / 2.0, size[2] / 2.0);
        let sigma = half * params.object_spread / 2.0;
        // Components split along the longer horizontal axis.
        let offset = if size[0] >= size[1] {
            Vector3::new(half.x / 2.0, 0.0, 0.0)
        } else {
            Vector3::new(0.0, half.y / 2.0, 0.0)
        };
        let local = |v: Vector3<f64>| -> Point3 {
            let (s, co) = yaw.sin_cos();
            Point3::new(
                c.x + co * v.x - s * v.y,
                c.y + s * v.x + co * v.y,
                bbox.center.z + v.z + GROUND_CLEARANCE / 2.0,
            )
        };
        let means = [local(offset), local(-offset)];
        out.push(PlantedObject { bbox, means, sigma });
    }
    Ok(out)
}

/// Rejection-samples the planted mixture inside the box, above the clearance.
fn sample_object(rng: &mut ChaCha8Rng, obj: &PlantedObject, n: usize) -> Result<Vec<Point3>> {
    let b = &obj.bbox;
    let floor = -b.height / 2.0 + GROUND_CLEARANCE.min(b.height / 2.0);
    let unit = Normal::new(0.0, 1.0).map_err(|e| Error::invalid(e.to_string()))?;
    let local_means: Vec<Vector3<f64>> = obj.means.iter().map(|m| b.to_local(m)).collect();
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n {
        tries += 1;
        if tries > 10_000 * n {
            return Err(Error::invalid("planted mixture misses its box"));
        }
        let m = &local_means[out.len() % 2];
        let v = Vector3::new(
            m.x + obj.sigma.x * unit.sample(rng),
            m.y + obj.sigma.y * unit.sample(rng),
            m.z + obj.sigma.z * unit.sample(rng),
        );
        if v.x.abs() <= b.width / 2.0 && v.y.abs() <= b.length / 2.0 && v.z >= floor && v.z <= b.height / 2.0 {
            let (s, c) = b.yaw.sin_cos();
            out.push(Point3::new(
                b.center.x + c * v.x - s * v.y,
                b.center.y + s * v.x + c * v.y,
                b.center.z + v.z,
            ));
        }
    }
    Ok(out)
}
