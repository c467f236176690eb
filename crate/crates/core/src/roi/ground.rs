//! Ring/sector ground removal.
//!
//! The x-y plane around the sensor is cut into concentric rings and angular
//! sectors. Each bin fits a plane `z = a·x + b·y + c` to its lowest points,
//! trims seeds lying above that plane, then refines it on the points near
//! it; anything no higher than `height_margin` above its bin's plane is
//! ground.

use nalgebra::{Matrix3, Vector3};

use super::RoiMask;
use crate::geometry::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundParams {
    pub rings: usize,
    pub sectors: usize,
    /// Fraction of each bin's points, lowest first, used to seed the plane.
    pub seed_quantile: f64,
    pub height_margin: f64,
    pub refine_iterations: usize,
    /// Outer radius of the last ring; defaults to the farthest point.
    pub max_range: Option<f64>,
}

impl Default for GroundParams {
    fn default() -> Self {
        Self {
            rings: 4,
            sectors: 16,
            seed_quantile: 0.2,
            height_margin: 0.2,
            refine_iterations: 3,
            max_range: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Plane {
    a: f64,
    b: f64,
    c: f64,
}

impl Plane {
    fn height(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }
}

/// Foreground mask: set for non-ground points.
pub fn ground_mask(cloud: &PointCloud) -> RoiMask {
    ground_mask_with(cloud, &GroundParams::default())
}

pub fn ground_mask_with(cloud: &PointCloud, params: &GroundParams) -> RoiMask {
    let pts = cloud.points();
    if pts.is_empty() {
        return RoiMask::zeros(0);
    }
    let rings = params.rings.max(1);
    let sectors = params.sectors.max(1);
    let max_range = params
        .max_range
        .unwrap_or_else(|| pts.iter().map(|p| p.x.hypot(p.y)).fold(0.0, f64::max))
        .max(f64::MIN_POSITIVE);

    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); rings * sectors];
    for (i, p) in pts.iter().enumerate() {
        let r = p.x.hypot(p.y);
        let ring = ((r / max_range * rings as f64) as usize).min(rings - 1);
        let theta = p.y.atan2(p.x) + std::f64::consts::PI;
        let sector = ((theta / std::f64::consts::TAU * sectors as f64) as usize).min(sectors - 1);
        bins[ring * sectors + sector].push(i);
    }

    let mut foreground = vec![false; pts.len()];
    for bin in bins.iter().filter(|b| !b.is_empty()) {
        let mut sorted = bin.clone();
        sorted.sort_by(|&i, &j| pts[i].z.total_cmp(&pts[j].z).then(i.cmp(&j)));
        let seeds = ((sorted.len() as f64 * params.seed_quantile).ceil() as usize)
            .max(3)
            .min(sorted.len());
        let mut seeds = sorted[..seeds].to_vec();
        let mut plane = fit_plane(cloud, &seeds);
        // Trim seeds sitting above the plane until only the lower envelope remains.
        for _ in 0..10 {
            let kept: Vec<usize> = seeds
                .iter()
                .copied()
                .filter(|&i| pts[i].z - plane.height(pts[i].x, pts[i].y) <= params.height_margin)
                .collect();
            if kept.len() == seeds.len() || kept.len() < 3 {
                break;
            }
            seeds = kept;
            plane = fit_plane(cloud, &seeds);
        }
        for _ in 0..params.refine_iterations {
            let inliers: Vec<usize> = bin
                .iter()
                .copied()
                .filter(|&i| (pts[i].z - plane.height(pts[i].x, pts[i].y)).abs() <= params.height_margin)
                .collect();
            if inliers.len() < 3 {
                break;
            }
            plane = fit_plane(cloud, &inliers);
        }
        for &i in bin {
            foreground[i] = pts[i].z - plane.height(pts[i].x, pts[i].y) > params.height_margin;
        }
    }
    RoiMask::new(foreground)
}

/// Least-squares plane through the selected points; falls back to a flat
/// plane at the mean height when the x-y spread is degenerate.
fn fit_plane(cloud: &PointCloud, ids: &[usize]) -> Plane {
    let pts = cloud.points();
    let n = ids.len() as f64;
    let (mx, my, mz) = ids.iter().fold((0.0, 0.0, 0.0), |(x, y, z), &i| {
        (x + pts[i].x / n, y + pts[i].y / n, z + pts[i].z / n)
    });
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for &i in ids {
        let row = Vector3::new(pts[i].x - mx, pts[i].y - my, 1.0);
        ata += row * row.transpose();
        atb += row * (pts[i].z - mz);
    }
    let spread = ata[(0, 0)] * ata[(1, 1)] - ata[(0, 1)] * ata[(0, 1)];
    if ids.len() < 3 || spread <= 1e-9 * (ata[(0, 0)] + ata[(1, 1)]).powi(2).max(1e-12) {
        return Plane { a: 0.0, b: 0.0, c: mz };
    }
    match ata.lu().solve(&atb) {
        Some(s) => Plane {
            a: s.x,
            b: s.y,
            c: mz + s.z - s.x * mx - s.y * my,
        },
        None => Plane { a: 0.0, b: 0.0, c: mz },
    }
}
