use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::RenderError;
use crate::voxel::VoxelSolid;

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> [f64; 3] {
        let n = self.points.len().max(1) as f64;
        let mut c = [0.0; 3];
        for p in &self.points {
            for k in 0..3 {
                c[k] += p[k];
            }
        }
        c.map(|v| v / n)
    }

    /// Centers on the centroid and scales the farthest point to norm 1.
    pub fn normalized(&self) -> PointCloud {
        let c = self.centroid();
        let centered: Vec<[f64; 3]> = self.points.iter().map(|p| [p[0] - c[0], p[1] - c[1], p[2] - c[2]]).collect();
        let max = centered.iter().map(|p| norm(*p)).fold(0.0f64, f64::max);
        if max == 0.0 {
            return PointCloud::new(centered);
        }
        PointCloud::new(centered.into_iter().map(|p| p.map(|v| v / max)).collect())
    }
}

fn norm(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Draws `n` points uniformly over surface voxels, each jittered uniformly
/// inside its voxel, in world coordinates. Voxels are drawn without
/// replacement when there are at least `n` of them.
pub fn sample_surface(solid: &VoxelSolid, n: usize, seed: u64) -> Result<PointCloud, RenderError> {
    let surface: Vec<(usize, usize, usize)> = solid.surface().collect();
    if surface.is_empty() || n == 0 {
        return Err(RenderError::EmptySolid);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<usize> = if surface.len() >= n {
        rand::seq::index::sample(&mut rng, surface.len(), n).into_vec()
    } else {
        (0..n).map(|_| rng.random_range(0..surface.len())).collect()
    };
    let h = solid.voxel_size();
    let points = picks
        .into_iter()
        .map(|i| {
            let (x, y, z) = surface[i];
            let c = solid.center(x, y, z);
            [
                c[0] + (rng.random::<f64>() - 0.5) * h,
                c[1] + (rng.random::<f64>() - 0.5) * h,
                c[2] + (rng.random::<f64>() - 0.5) * h,
            ]
        })
        .collect();
    Ok(PointCloud::new(points))
}

/// Surface sample normalized to zero mean and unit max-norm.
pub fn sample_points(solid: &VoxelSolid, n: usize, seed: u64) -> Result<PointCloud, RenderError> {
    Ok(sample_surface(solid, n, seed)?.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(r: usize, lo: usize, hi: usize) -> VoxelSolid {
        VoxelSolid::from_fn(r, |x, y, z| [x, y, z].iter().all(|&v| (lo..hi).contains(&v)))
    }

    #[test]
    fn deterministic_per_seed() {
        let s = cube(32, 8, 24);
        assert_eq!(sample_points(&s, 500, 3).unwrap(), sample_points(&s, 500, 3).unwrap());
        assert_ne!(sample_points(&s, 500, 3).unwrap(), sample_points(&s, 500, 4).unwrap());
    }

    #[test]
    fn normalized_stats() {
        let pc = sample_points(&cube(32, 4, 20), 2048, 1).unwrap();
        assert_eq!(pc.len(), 2048);
        let c = pc.centroid();
        assert!(c.iter().all(|v| v.abs() < 1e-12));
        let max = pc.points.iter().map(|p| norm(*p)).fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_surface_uses_replacement() {
        let mut s = VoxelSolid::empty(8).unwrap();
        s.set(3, 3, 3, true);
        let pc = sample_surface(&s, 10, 0).unwrap();
        assert_eq!(pc.len(), 10);
        let c = s.center(3, 3, 3);
        for p in &pc.points {
            assert!((0..3).all(|k| (p[k] - c[k]).abs() <= s.voxel_size() / 2.0));
        }
    }

    #[test]
    fn empty_solid_errors() {
        let s = VoxelSolid::empty(8).unwrap();
        assert_eq!(sample_points(&s, 10, 0), Err(RenderError::EmptySolid));
    }
}
