use crate::error::RenderError;

/// Boolean occupancy of an `r³` grid over the world cube `[-1, 1]³`.
///
/// Voxel `(x, y, z)` is stored at `x + r * (y + r * z)` and centered at
/// `-1 + (i + 0.5) * 2 / r` along each axis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VoxelSolid {
    resolution: usize,
    cells: Vec<bool>,
}

impl VoxelSolid {
    pub fn empty(resolution: usize) -> Result<Self, RenderError> {
        if resolution < 2 {
            return Err(RenderError::InvalidResolution(resolution));
        }
        Ok(Self { resolution, cells: vec![false; resolution.pow(3)] })
    }

    pub(crate) fn from_fn(resolution: usize, f: impl Fn(usize, usize, usize) -> bool) -> Self {
        let mut cells = Vec::with_capacity(resolution.pow(3));
        for z in 0..resolution {
            for y in 0..resolution {
                for x in 0..resolution {
                    cells.push(f(x, y, z));
                }
            }
        }
        Self { resolution, cells }
    }

    pub(crate) fn from_cells(resolution: usize, cells: Vec<bool>) -> Self {
        debug_assert_eq!(cells.len(), resolution.pow(3));
        Self { resolution, cells }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.resolution * (y + self.resolution * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.cells[self.index(x, y, z)]
    }

    /// Like [`get`](Self::get) but treats anything outside the grid as empty.
    pub fn get_signed(&self, x: isize, y: isize, z: isize) -> bool {
        let r = self.resolution as isize;
        if x < 0 || y < 0 || z < 0 || x >= r || y >= r || z >= r {
            return false;
        }
        self.get(x as usize, y as usize, z as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.index(x, y, z);
        self.cells[i] = value;
    }

    pub fn voxel_size(&self) -> f64 {
        2.0 / self.resolution as f64
    }

    pub fn center(&self, x: usize, y: usize, z: usize) -> [f64; 3] {
        let h = self.voxel_size();
        [-1.0 + (x as f64 + 0.5) * h, -1.0 + (y as f64 + 0.5) * h, -1.0 + (z as f64 + 0.5) * h]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    /// Occupied share of the grid.
    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.cells.len() as f64
    }

    /// Occupied volume in world units (the cube has volume 8).
    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.voxel_size().powi(3)
    }

    pub fn occupied(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let r = self.resolution;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(i, _)| (i % r, (i / r) % r, i / (r * r)))
    }

    /// Occupied voxels with at least one empty 6-neighbor.
    pub fn surface(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        const NEIGHBORS: [[isize; 3]; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
        self.occupied().filter(move |&(x, y, z)| {
            NEIGHBORS
                .iter()
                .any(|d| !self.get_signed(x as isize + d[0], y as isize + d[1], z as isize + d[2]))
        })
    }

    fn combine(&self, other: &VoxelSolid, f: impl Fn(bool, bool) -> bool) -> Result<VoxelSolid, RenderError> {
        if self.resolution != other.resolution {
            return Err(RenderError::ResolutionMismatch(self.resolution, other.resolution));
        }
        let cells = self.cells.iter().zip(&other.cells).map(|(&a, &b)| f(a, b)).collect();
        Ok(VoxelSolid { resolution: self.resolution, cells })
    }

    pub fn union(&self, other: &VoxelSolid) -> Result<VoxelSolid, RenderError> {
        self.combine(other, |a, b| a || b)
    }

    pub fn difference(&self, other: &VoxelSolid) -> Result<VoxelSolid, RenderError> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn intersection(&self, other: &VoxelSolid) -> Result<VoxelSolid, RenderError> {
        self.combine(other, |a, b| a && b)
    }

    /// Intersection over union; two empty solids count as identical.
    pub fn iou(&self, other: &VoxelSolid) -> Result<f64, RenderError> {
        if self.resolution != other.resolution {
            return Err(RenderError::ResolutionMismatch(self.resolution, other.resolution));
        }
        let (mut inter, mut uni) = (0usize, 0usize);
        for (&a, &b) in self.cells.iter().zip(&other.cells) {
            inter += (a && b) as usize;
            uni += (a || b) as usize;
        }
        Ok(if uni == 0 { 1.0 } else { inter as f64 / uni as f64 })
    }

    /// Rotates the grid a quarter turn about the z axis: `(x, y) -> (-y, x)`.
    pub fn rotate_quarter_z(&self) -> VoxelSolid {
        let r = self.resolution;
        VoxelSolid::from_fn(r, |x, y, z| self.get(y, r - 1 - x, z))
    }

    /// Marks every voxel within one step (26-neighborhood) of an occupied one.
    pub fn dilate(&self) -> VoxelSolid {
        let r = self.resolution as isize;
        VoxelSolid::from_fn(self.resolution, |x, y, z| {
            let (x, y, z) = (x as isize, y as isize, z as isize);
            (-1..=1).any(|dz| {
                (-1..=1).any(|dy| (-1..=1).any(|dx| {
                    let (a, b, c) = (x + dx, y + dy, z + dz);
                    a >= 0 && b >= 0 && c >= 0 && a < r && b < r && c < r && self.get_signed(a, b, c)
                }))
            })
        })
    }

    /// True if every occupied voxel of `self` is occupied in `other`.
    pub fn is_subset_of(&self, other: &VoxelSolid) -> bool {
        self.resolution == other.resolution && self.cells.iter().zip(&other.cells).all(|(&a, &b)| !a || b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(r: usize, lo: [usize; 3], hi: [usize; 3]) -> VoxelSolid {
        VoxelSolid::from_fn(r, |x, y, z| {
            (lo[0]..hi[0]).contains(&x) && (lo[1]..hi[1]).contains(&y) && (lo[2]..hi[2]).contains(&z)
        })
    }

    #[test]
    fn boolean_counts() {
        let a = block(8, [0, 0, 0], [4, 4, 4]);
        let b = block(8, [2, 2, 2], [6, 6, 6]);
        assert_eq!(a.union(&b).unwrap().count(), 64 + 64 - 8);
        assert_eq!(a.intersection(&b).unwrap().count(), 8);
        assert_eq!(a.difference(&b).unwrap().count(), 56);
        assert!((a.iou(&b).unwrap() - 8.0 / 120.0).abs() < 1e-12);
    }

    #[test]
    fn mismatch_rejected() {
        let a = VoxelSolid::empty(8).unwrap();
        let b = VoxelSolid::empty(16).unwrap();
        assert_eq!(a.union(&b), Err(RenderError::ResolutionMismatch(8, 16)));
    }

    #[test]
    fn surface_of_block_excludes_core() {
        let a = block(8, [1, 1, 1], [5, 5, 5]);
        assert_eq!(a.surface().count(), 64 - 8);
        let full = block(4, [0, 0, 0], [4, 4, 4]);
        assert_eq!(full.surface().count(), 64 - 8);
    }

    #[test]
    fn four_quarter_turns_is_identity() {
        let a = block(8, [0, 1, 2], [3, 7, 4]);
        let b = a.rotate_quarter_z().rotate_quarter_z().rotate_quarter_z().rotate_quarter_z();
        assert_eq!(a, b);
        assert_ne!(a, a.rotate_quarter_z());
    }

    #[test]
    fn volume_units() {
        let full = block(4, [0, 0, 0], [4, 4, 4]);
        assert!((full.volume() - 8.0).abs() < 1e-12);
        assert_eq!(full.center(0, 0, 0), [-0.75, -0.75, -0.75]);
    }
}
