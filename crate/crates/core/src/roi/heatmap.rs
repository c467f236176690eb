//! Bird's-eye RoI heatmaps rasterized from projected mixtures.

use std::io::Write;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::{Gmm2, RoiMask};
use crate::geometry::PointCloud;
use crate::{Error, Result};

/// Square-celled x-y grid. Cell `(ix, iy)` covers
/// `[x_min + ix·cell, x_min + (ix+1)·cell) × [y_min + iy·cell, …)` and is
/// stored at `iy * cols + ix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridGeometry {
    pub x_min: f64,
    pub y_min: f64,
    pub cell_size: f64,
    pub cols: usize,
    pub rows: usize,
}

impl Default for GridGeometry {
    /// 200 × 200 cells of 0.5 m over x, y ∈ [-50 m, 50 m).
    fn default() -> Self {
        Self {
            x_min: -50.0,
            y_min: -50.0,
            cell_size: 0.5,
            cols: 200,
            rows: 200,
        }
    }
}

impl GridGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite())
            || !self.x_min.is_finite()
            || !self.y_min.is_finite()
            || self.cols == 0
            || self.rows == 0
        {
            return Err(Error::invalid("grid geometry must have positive size and finite origin"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.cols as f64 * self.cell_size
    }

    pub fn y_max(&self) -> f64 {
        self.y_min + self.rows as f64 * self.cell_size
    }

    /// Flat index of the cell containing `(x, y)`, if inside the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<usize> {
        let fx = ((x - self.x_min) / self.cell_size).floor();
        let fy = ((y - self.y_min) / self.cell_size).floor();
        if fx >= 0.0 && fy >= 0.0 && fx < self.cols as f64 && fy < self.rows as f64 {
            Some(fy as usize * self.cols + fx as usize)
        } else {
            None
        }
    }

    pub fn cell_center(&self, cell: usize) -> Vector2<f64> {
        let (ix, iy) = (cell % self.cols, cell / self.cols);
        Vector2::new(
            self.x_min + (ix as f64 + 0.5) * self.cell_size,
            self.y_min + (iy as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.cell_of(x, y).is_some()
    }
}

/// Per-class heatmap channels with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiHeatmap {
    pub geometry: GridGeometry,
    pub channels: Vec<Vec<f64>>,
}

/// Binary occupancy over a [`GridGeometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryGrid {
    pub geometry: GridGeometry,
    pub cells: Vec<bool>,
}

impl RoiHeatmap {
    pub fn zeros(geometry: GridGeometry, classes: usize) -> Self {
        Self {
            geometry,
            channels: vec![vec![0.0; geometry.len()]; classes],
        }
    }

    /// 16-bit binary PGM of one channel, samples `round(65535·Y)`, big-endian
    /// as the format requires, first row at `y_min`.
    pub fn write_pgm<W: Write>(&self, channel: usize, mut w: W) -> Result<()> {
        let data = self
            .channels
            .get(channel)
            .ok_or_else(|| Error::invalid(format!("no heatmap channel {channel}")))?;
        write!(w, "P5\n{} {}\n65535\n", self.geometry.cols, self.geometry.rows)?;
        let mut buf = Vec::with_capacity(data.len() * 2);
        for &v in data {
            buf.extend_from_slice(&((v.clamp(0.0, 1.0) * 65535.0).round() as u16).to_be_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }
}

/// Rasterizes each mixture onto its class channel.
///
/// A mixture's field is `(1/C) Σ_c N(cell center | μ'_c, Σ'_c)` divided by its
/// own maximum over the grid, so every contributing mixture peaks at exactly
/// 1. Channels take the cell-wise maximum over their mixtures. Mixtures whose
/// component means all lie outside the grid are skipped.
pub fn rasterize_heatmap(
    gmms: &[(Gmm2, u32)],
    geometry: &GridGeometry,
    classes: usize,
) -> Result<RoiHeatmap> {
    geometry.validate()?;
    let mut heatmap = RoiHeatmap::zeros(*geometry, classes);
    let centers: Vec<Vector2<f64>> = (0..geometry.len()).map(|c| geometry.cell_center(c)).collect();
    for (gmm, class) in gmms {
        let channel = heatmap
            .channels
            .get_mut(*class as usize)
            .ok_or_else(|| Error::invalid(format!("class {class} outside {classes} channels")))?;
        if gmm.components() == 0 || !gmm.means.iter().any(|m| geometry.contains(m.x, m.y)) {
            continue;
        }
        let field = normalized_field(gmm, &centers);
        for (dst, v) in channel.iter_mut().zip(field) {
            *dst = dst.max(v);
        }
    }
    Ok(heatmap)
}

/// A mixture's log-density at each point, shifted so the maximum maps to 1.
pub fn normalized_field(gmm: &Gmm2, at: &[Vector2<f64>]) -> Vec<f64> {
    let eval = gmm.evaluator();
    let logs: Vec<f64> = at.iter().map(|p| eval.log_density(p)).collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return vec![0.0; at.len()];
    }
    logs.into_iter().map(|l| (l - peak).exp()).collect()
}

/// A cell is set when any class channel reaches `gamma`.
pub fn binarize_heatmap(h: &RoiHeatmap, gamma: f64) -> Result<BinaryGrid> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid(format!("gamma {gamma} outside (0, 1]")));
    }
    let cells = (0..h.geometry.len())
        .map(|i| h.channels.iter().any(|ch| ch[i] >= gamma))
        .collect();
    Ok(BinaryGrid {
        geometry: h.geometry,
        cells,
    })
}

/// Point `i` is set when its (x, y) falls in a set cell; points outside the
/// grid are clear.
pub fn mask_from_grid(cloud: &PointCloud, grid: &BinaryGrid) -> RoiMask {
    RoiMask::new(
        cloud
            .points()
            .iter()
            .map(|p| grid.geometry.cell_of(p.x, p.y).is_some_and(|c| grid.cells[c]))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use nalgebra::Matrix2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn single(mean: (f64, f64), var: f64) -> Gmm2 {
        Gmm2 {
            means: vec![Vector2::new(mean.0, mean.1)],
            covariances: vec![Matrix2::identity() * var],
        }
    }

    fn gaussian_pdf(p: &Vector2<f64>, m: &Vector2<f64>, c: &Matrix2<f64>) -> f64 {
        let d = p - m;
        let inv = c.try_inverse().unwrap();
        (-0.5 * d.dot(&(inv * d))).exp() / (2.0 * PI * c.determinant().sqrt())
    }

    #[test]
    fn grid_addressing() {
        let g = GridGeometry::default();
        assert_eq!(g.cell_of(-50.0, -50.0), Some(0));
        assert_eq!(g.cell_of(-49.76, -50.0), Some(0));
        assert_eq!(g.cell_of(-49.5, -50.0), Some(1));
        assert_eq!(g.cell_of(-50.0, -49.5), Some(200));
        assert_eq!(g.cell_of(50.0, 0.0), None);
        assert_eq!(g.cell_of(-50.01, 0.0), None);
        for c in [0, 17, 39_999, 20_100] {
            let m = g.cell_center(c);
            assert_eq!(g.cell_of(m.x, m.y), Some(c));
        }
    }

    #[test]
    fn no_gmms_gives_zero_heatmap() {
        let h = rasterize_heatmap(&[], &GridGeometry::default(), 3).unwrap();
        assert!(h.channels.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn peak_cell_is_one_and_decays() {
        let g = GridGeometry::default();
        let center = g.cell_center(100 * 200 + 100);
        let h = rasterize_heatmap(&[(single((center.x, center.y), 1.0), 0)], &g, 1).unwrap();
        let ch = &h.channels[0];
        assert_eq!(ch[100 * 200 + 100], 1.0);
        let mut prev = 1.0;
        for dx in 1..20 {
            let v = ch[100 * 200 + 100 + dx];
            assert!(v < prev);
            prev = v;
        }
        assert!(ch.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn overlapping_mixtures_take_cellwise_max() {
        let g = GridGeometry { x_min: -5.0, y_min: -5.0, cell_size: 0.25, cols: 40, rows: 40 };
        let a = single((0.3, -0.2), 0.8);
        let b = Gmm2 {
            means: vec![Vector2::new(1.1, 0.4), Vector2::new(1.6, 1.0)],
            covariances: vec![Matrix2::new(0.5, 0.1, 0.1, 0.3), Matrix2::identity() * 0.2],
        };
        let h = rasterize_heatmap(&[(a.clone(), 0), (b.clone(), 0)], &g, 1).unwrap();
        // direct evaluation with the closed-form density, normalized by the grid maximum
        let direct = |m: &Gmm2| -> Vec<f64> {
            let vals: Vec<f64> = (0..g.len())
                .map(|c| {
                    let p = g.cell_center(c);
                    m.means
                        .iter()
                        .zip(&m.covariances)
                        .map(|(mu, cov)| gaussian_pdf(&p, mu, cov))
                        .sum::<f64>()
                        / m.components() as f64
                })
                .collect();
            let peak = vals.iter().copied().fold(0.0, f64::max);
            vals.into_iter().map(|v| v / peak).collect()
        };
        let (fa, fb) = (direct(&a), direct(&b));
        for c in 0..g.len() {
            assert!((h.channels[0][c] - fa[c].max(fb[c])).abs() < 1e-12);
        }
        assert!(h.channels[0].iter().filter(|&&v| v == 1.0).count() >= 1);
    }

    #[test]
    fn classes_land_on_their_channels() {
        let g = GridGeometry::default();
        let h = rasterize_heatmap(&[(single((0.0, 0.0), 1.0), 2)], &g, 3).unwrap();
        assert!(h.channels[0].iter().all(|&v| v == 0.0));
        assert!(h.channels[2].iter().any(|&v| v == 1.0));
        assert!(rasterize_heatmap(&[(single((0.0, 0.0), 1.0), 3)], &g, 3).is_err());
    }

    #[test]
    fn off_grid_mixture_is_ignored() {
        let g = GridGeometry::default();
        let h = rasterize_heatmap(&[(single((80.0, 0.0), 1.0), 0)], &g, 1).unwrap();
        assert!(h.channels[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn binarize_examples() {
        let g = GridGeometry { cols: 4, rows: 3, ..GridGeometry::default() };
        let mut h = RoiHeatmap::zeros(g, 2);
        assert!(binarize_heatmap(&h, 0.4).unwrap().cells.iter().all(|&b| !b));
        h.channels[1] = vec![0.4; g.len()];
        assert!(binarize_heatmap(&h, 0.4).unwrap().cells.iter().all(|&b| b));
        assert!(binarize_heatmap(&h, 0.0).is_err());
    }

    #[test]
    fn binarize_matches_max_then_threshold_and_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = GridGeometry { cols: 30, rows: 20, ..GridGeometry::default() };
        let mut h = RoiHeatmap::zeros(g, 3);
        for ch in &mut h.channels {
            ch.iter_mut().for_each(|v| *v = rng.random_range(0.0..1.0));
        }
        let gamma = 0.7;
        let b = binarize_heatmap(&h, gamma).unwrap();
        for c in 0..g.len() {
            let max = h.channels.iter().map(|ch| ch[c]).fold(0.0, f64::max);
            assert_eq!(b.cells[c], max >= gamma);
        }
        let as_heat = RoiHeatmap {
            geometry: g,
            channels: vec![b.cells.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect()],
        };
        for gamma in [0.01, 0.5, 1.0] {
            assert_eq!(binarize_heatmap(&as_heat, gamma).unwrap(), b);
        }
    }

    #[test]
    fn mask_from_grid_lookup() {
        let g = GridGeometry::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<Point3> = (0..5000)
            .map(|_| Point3::new(rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0), 0.0))
            .collect();
        let cloud = PointCloud::new(pts).unwrap();
        let ones = BinaryGrid { geometry: g, cells: vec![true; g.len()] };
        let m = mask_from_grid(&cloud, &ones);
        for (p, &b) in cloud.points().iter().zip(m.bits()) {
            let inside = p.x >= -50.0 && p.x < 50.0 && p.y >= -50.0 && p.y < 50.0;
            assert_eq!(b, inside);
        }
        let zeros = BinaryGrid { geometry: g, cells: vec![false; g.len()] };
        assert_eq!(mask_from_grid(&cloud, &zeros).count(), 0);
        let random = BinaryGrid { geometry: g, cells: (0..g.len()).map(|_| rng.random_bool(0.3)).collect() };
        let m = mask_from_grid(&cloud, &random);
        for (p, &b) in cloud.points().iter().zip(m.bits()) {
            let ix = ((p.x + 50.0) / 0.5).floor();
            let iy = ((p.y + 50.0) / 0.5).floor();
            let expected = (0.0..200.0).contains(&ix)
                && (0.0..200.0).contains(&iy)
                && random.cells[iy as usize * 200 + ix as usize];
            assert_eq!(b, expected);
        }
    }

    #[test]
    fn pgm_layout() {
        let g = GridGeometry { cols: 2, rows: 1, ..GridGeometry::default() };
        let h = RoiHeatmap { geometry: g, channels: vec![vec![1.0, 0.5]] };
        let mut buf = Vec::new();
        h.write_pgm(0, &mut buf).unwrap();
        assert_eq!(&buf[..15], b"P5\n2 1\n65535\n\xff\xff");
        assert_eq!(&buf[15..], &[0x80, 0x00]);
    }
}
