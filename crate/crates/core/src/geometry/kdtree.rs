use super::{Point3, PointCloud};

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
struct Node {
    lo: [f64; 3],
    hi: [f64; 3],
    kind: NodeKind,
}

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf { start: usize, end: usize },
    Split { left: usize, right: usize },
}

/// Balanced k-d tree over a fixed point set.
///
/// Built once per cloud by splitting at the median of the widest axis until
/// at most 16 points remain per leaf; immutable afterwards. Every node keeps
/// the tight bounds of its points, which is what the queries prune against.
/// Query results are original point indices in ascending order.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<[f64; 3]>,
    ids: Vec<usize>,
    nodes: Vec<Node>,
}

impl SpatialIndex {
    pub fn build(cloud: &PointCloud) -> Self {
        Self::from_points(cloud.points())
    }

    pub fn from_points(points: &[Point3]) -> Self {
        let mut ids: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            build_node(points, &mut ids, 0, &mut nodes);
        }
        let points = ids.iter().map(|&i| [points[i].x, points[i].y, points[i].z]).collect();
        Self { points, ids, nodes }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// All indices `i` with `|p_i - center|² <= radius²`, sorted ascending.
    pub fn query_ball(&self, center: &Point3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.nodes.is_empty() || radius < 0.0 {
            return out;
        }
        let q = [center.x, center.y, center.z];
        let r2 = radius * radius;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if box_dist2(&node.lo, &node.hi, &q) > r2 {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, end } => {
                    for k in start..end {
                        if dist2(&self.points[k], &q) <= r2 {
                            out.push(self.ids[k]);
                        }
                    }
                }
                NodeKind::Split { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Whether any indexed point lies within `radius` of `center`.
    pub fn any_within(&self, center: &Point3, radius: f64) -> bool {
        if self.nodes.is_empty() || radius < 0.0 {
            return false;
        }
        let q = [center.x, center.y, center.z];
        let r2 = radius * radius;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if box_dist2(&node.lo, &node.hi, &q) > r2 {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, end } => {
                    if self.points[start..end].iter().any(|p| dist2(p, &q) <= r2) {
                        return true;
                    }
                }
                NodeKind::Split { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        false
    }

    /// Nearest indexed point as `(index, squared distance)`. Ties resolve to
    /// the smaller original index.
    pub fn nearest(&self, query: &Point3) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let q = [query.x, query.y, query.z];
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(0, &q, &mut best);
        Some(best)
    }

    fn nearest_rec(&self, n: usize, q: &[f64; 3], best: &mut (usize, f64)) {
        let node = &self.nodes[n];
        if box_dist2(&node.lo, &node.hi, q) > best.1 {
            return;
        }
        match node.kind {
            NodeKind::Leaf { start, end } => {
                for k in start..end {
                    let d = dist2(&self.points[k], q);
                    let id = self.ids[k];
                    if d < best.1 || (d == best.1 && id < best.0) {
                        *best = (id, d);
                    }
                }
            }
            NodeKind::Split { left, right } => {
                let dl = box_dist2(&self.nodes[left].lo, &self.nodes[left].hi, q);
                let dr = box_dist2(&self.nodes[right].lo, &self.nodes[right].hi, q);
                let (first, second) = if dl <= dr { (left, right) } else { (right, left) };
                self.nearest_rec(first, q, best);
                self.nearest_rec(second, q, best);
            }
        }
    }
}

fn build_node(points: &[Point3], ids: &mut [usize], offset: usize, nodes: &mut Vec<Node>) -> usize {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in ids.iter() {
        for a in 0..3 {
            lo[a] = lo[a].min(points[i][a]);
            hi[a] = hi[a].max(points[i][a]);
        }
    }
    let me = nodes.len();
    nodes.push(Node {
        lo,
        hi,
        kind: NodeKind::Leaf {
            start: offset,
            end: offset + ids.len(),
        },
    });
    if ids.len() <= LEAF_SIZE {
        return me;
    }
    let axis = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap_or(0);
    let mid = ids.len() / 2;
    ids.select_nth_unstable_by(mid, |&a, &b| points[a][axis].total_cmp(&points[b][axis]));
    let (left_ids, right_ids) = ids.split_at_mut(mid);
    let left = build_node(points, left_ids, offset, nodes);
    let right = build_node(points, right_ids, offset + mid, nodes);
    nodes[me].kind = NodeKind::Split { left, right };
    me
}

#[inline]
fn dist2(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    let dz = p[2] - q[2];
    dx * dx + dy * dy + dz * dz
}

#[inline]
fn box_dist2(lo: &[f64; 3], hi: &[f64; 3], q: &[f64; 3]) -> f64 {
    let axis = |a: usize| {
        if q[a] < lo[a] {
            lo[a] - q[a]
        } else if q[a] > hi[a] {
            q[a] - hi[a]
        } else {
            0.0
        }
    };
    let (dx, dy, dz) = (axis(0), axis(1), axis(2));
    dx * dx + dy * dy + dz * dz
}
