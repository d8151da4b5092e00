use sem_core::quant::GRID;
use sem_core::validate::ORTHONORMAL_TOLERANCE;
use sem_core::Extrusion;

use crate::error::RenderError;
use crate::raster::Region2D;
use crate::voxel::VoxelSolid;

/// Sweeps a profile into a voxel prism.
///
/// The profile is scaled about the scale center, swept along the sketch
/// normal between the two extents, rotated, then translated. Each voxel
/// center is mapped back through that chain and kept if it lands inside the
/// sweep. The boolean operation is left to the caller. A zero-height sweep
/// or an empty profile gives an empty solid, not an error.
pub fn extrude(region: &Region2D, ext: &Extrusion, resolution: usize) -> Result<VoxelSolid, RenderError> {
    if resolution < 2 {
        return Err(RenderError::InvalidResolution(resolution));
    }
    let ortho = ext.orthonormality_error();
    if ortho > ORTHONORMAL_TOLERANCE {
        return Err(RenderError::RotationNotOrthonormal(ortho));
    }
    if ext.scale == 0 {
        return Err(RenderError::ScaleNotPositive);
    }
    let (a, b) = ext.extents();
    let (lo, hi) = (a.min(b), a.max(b));
    if lo == hi || region.is_empty() {
        return VoxelSolid::empty(resolution);
    }
    let rot = ext.rotation_matrix();
    let t = ext.translation_world();
    let s = ext.scale_factor();
    let g = GRID as f64;
    let (ox, oy) = (ext.scale_center.x as f64 / g, ext.scale_center.y as f64 / g);
    let h = 2.0 / resolution as f64;
    let coord = |i: usize| -1.0 + (i as f64 + 0.5) * h;

    let mut cells = vec![false; resolution.pow(3)];
    let mut idx = 0;
    for z in 0..resolution {
        let dz = coord(z) - t[2];
        for y in 0..resolution {
            let dy = coord(y) - t[1];
            for x in 0..resolution {
                let dx = coord(x) - t[0];
                // local = Rᵀ (c - T)
                let pz = rot[0][2] * dx + rot[1][2] * dy + rot[2][2] * dz;
                if pz >= lo && pz < hi {
                    let px = rot[0][0] * dx + rot[1][0] * dy + rot[2][0] * dz;
                    let py = rot[0][1] * dx + rot[1][1] * dy + rot[2][1] * dz;
                    let u = ox + ((px + 1.0) / 2.0 - ox) / s;
                    let v = oy + ((py + 1.0) / 2.0 - oy) / s;
                    cells[idx] = region.sample(u, v);
                }
                idx += 1;
            }
        }
    }
    Ok(VoxelSolid::from_cells(resolution, cells))
}
