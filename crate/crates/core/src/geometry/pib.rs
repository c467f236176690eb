use nalgebra::{Matrix3, Vector3};

use super::{OrientedBox, Point3, PointCloud, SpatialIndex, BOX_TETRAHEDRA};

/// Barycentric coordinates down to this value count as inside, so points on
/// a face are members.
const BARYCENTRIC_SLACK: f64 = -1e-12;

#[derive(Debug, Clone)]
struct Tetrahedron {
    origin: Vector3<f64>,
    to_barycentric: Matrix3<f64>,
}

impl Tetrahedron {
    fn new(v: [Point3; 4]) -> Self {
        let edges = Matrix3::from_columns(&[v[1] - v[0], v[2] - v[0], v[3] - v[0]]);
        // Non-degenerate for every valid box, each tetrahedron has volume w*l*h/6.
        let to_barycentric = edges.try_inverse().unwrap_or_else(Matrix3::zeros);
        Self {
            origin: v[0].coords,
            to_barycentric,
        }
    }

    fn contains(&self, p: &Point3) -> bool {
        let l = self.to_barycentric * (p.coords - self.origin);
        l.x >= BARYCENTRIC_SLACK
            && l.y >= BARYCENTRIC_SLACK
            && l.z >= BARYCENTRIC_SLACK
            && 1.0 - l.x - l.y - l.z >= BARYCENTRIC_SLACK
    }
}

/// A box hull split into the six tetrahedra of [`BOX_TETRAHEDRA`].
#[derive(Debug, Clone)]
pub struct BoxHull {
    tetrahedra: Vec<Tetrahedron>,
}

impl BoxHull {
    pub fn new(b: &OrientedBox) -> Self {
        let c = b.corners();
        Self {
            tetrahedra: BOX_TETRAHEDRA
                .iter()
                .map(|t| Tetrahedron::new(t.map(|i| c[i])))
                .collect(),
        }
    }

    pub fn contains(&self, p: &Point3) -> bool {
        self.tetrahedra.iter().any(|t| t.contains(p))
    }

    /// Signed volumes of the tetrahedra (all positive for a valid box).
    pub fn volumes(b: &OrientedBox) -> [f64; 6] {
        let c = b.corners();
        BOX_TETRAHEDRA.map(|t| {
            let m = Matrix3::from_columns(&[c[t[1]] - c[t[0]], c[t[2]] - c[t[0]], c[t[3]] - c[t[0]]]);
            m.determinant().abs() / 6.0
        })
    }
}

/// Indices of the points inside each box, in box order.
///
/// One k-d tree is built over the cloud; each box first narrows the
/// candidates to its circumscribed sphere and then keeps the survivors that
/// fall in any tetrahedron of the box hull.
pub fn points_in_boxes(cloud: &PointCloud, boxes: &[OrientedBox]) -> Vec<Vec<usize>> {
    if boxes.is_empty() {
        return Vec::new();
    }
    let index = SpatialIndex::build(cloud);
    points_in_boxes_with_index(cloud, &index, boxes)
}

/// As [`points_in_boxes`] with a prebuilt index over `cloud`.
pub fn points_in_boxes_with_index(
    cloud: &PointCloud,
    index: &SpatialIndex,
    boxes: &[OrientedBox],
) -> Vec<Vec<usize>> {
    let points = cloud.points();
    boxes
        .iter()
        .map(|b| {
            let candidates = index.query_ball(&b.center, b.circumradius());
            if candidates.is_empty() {
                return candidates;
            }
            let hull = BoxHull::new(b);
            candidates
                .into_iter()
                .filter(|&i| hull.contains(&points[i]))
                .collect()
        })
        .collect()
}

/// Reference path: tests every point against every box in the box frame.
pub fn points_in_boxes_bruteforce(cloud: &PointCloud, boxes: &[OrientedBox]) -> Vec<Vec<usize>> {
    let points = cloud.points();
    boxes
        .iter()
        .map(|b| (0..points.len()).filter(|&i| b.contains(&points[i])).collect())
        .collect()
}
