use render::PointCloud;

use crate::error::MetricsError;

/// Static 3D kd-tree over a point set, stored implicitly: the median of each
/// index range is the splitting node, children are the two halves.
pub struct KdTree {
    points: Vec<[f64; 3]>,
}

impl KdTree {
    pub fn new(points: &[[f64; 3]]) -> Self {
        let mut points = points.to_vec();
        build(&mut points, 0);
        Self { points }
    }

    /// Squared distance from `q` to its nearest stored point.
    pub fn nearest_sq(&self, q: [f64; 3]) -> f64 {
        let mut best = f64::INFINITY;
        search(&self.points, 0, q, &mut best);
        best
    }
}

fn build(pts: &mut [[f64; 3]], axis: usize) {
    if pts.len() <= 1 {
        return;
    }
    let mid = pts.len() / 2;
    pts.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    let (left, right) = pts.split_at_mut(mid);
    build(left, (axis + 1) % 3);
    build(&mut right[1..], (axis + 1) % 3);
}

fn search(pts: &[[f64; 3]], axis: usize, q: [f64; 3], best: &mut f64) {
    if pts.is_empty() {
        return;
    }
    let mid = pts.len() / 2;
    let p = pts[mid];
    *best = best.min(dist_sq(p, q));
    let diff = q[axis] - p[axis];
    let (near, far) = if diff < 0.0 { (&pts[..mid], &pts[mid + 1..]) } else { (&pts[mid + 1..], &pts[..mid]) };
    let next = (axis + 1) % 3;
    search(near, next, q, best);
    if diff * diff < *best {
        search(far, next, q, best);
    }
}

#[inline]
pub fn dist_sq(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

fn directional(from: &[[f64; 3]], tree: &KdTree) -> f64 {
    from.iter().map(|&p| tree.nearest_sq(p)).sum::<f64>() / from.len() as f64
}

/// Symmetric Chamfer distance with squared point distances: the mean nearest
/// distance from `a` to `b` plus the mean from `b` to `a`.
pub fn chamfer(a: &PointCloud, b: &PointCloud) -> Result<f64, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    let (ta, tb) = (KdTree::new(&a.points), KdTree::new(&b.points));
    Ok(directional(&a.points, &tb) + directional(&b.points, &ta))
}

/// Chamfer distance against prebuilt trees, for repeated comparisons.
pub(crate) fn chamfer_indexed(a: &PointCloud, ta: &KdTree, b: &PointCloud, tb: &KdTree) -> f64 {
    directional(&a.points, tb) + directional(&b.points, ta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_points() {
        let a = PointCloud::new(vec![[0.0, 0.0, 0.0]]);
        let b = PointCloud::new(vec![[1.0, 0.0, 0.0]]);
        assert_eq!(chamfer(&a, &b).unwrap(), 2.0);
        assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn empty_rejected() {
        let a = PointCloud::new(vec![]);
        let b = PointCloud::new(vec![[1.0, 0.0, 0.0]]);
        assert_eq!(chamfer(&a, &b), Err(MetricsError::EmptyCloud));
    }

    #[test]
    fn duplicate_points_in_tree() {
        let pts = vec![[0.5, 0.5, 0.5]; 9];
        let t = KdTree::new(&pts);
        assert_eq!(t.nearest_sq([0.5, 0.5, 1.5]), 1.0);
    }
}
