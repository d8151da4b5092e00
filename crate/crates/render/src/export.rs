//! File formats: `.xyz` point lists, run-length voxel dumps and PGM
//! silhouette composites.

use std::io::{self, Read, Write};

use crate::sample::PointCloud;
use crate::voxel::VoxelSolid;

pub const VOXEL_MAGIC: &[u8; 4] = b"VOXR";

/// Writes one `x y z` line per point.
pub fn write_xyz(mut w: impl Write, cloud: &PointCloud) -> io::Result<()> {
    for p in &cloud.points {
        writeln!(w, "{:.6} {:.6} {:.6}", p[0], p[1], p[2])?;
    }
    Ok(())
}

pub fn read_xyz(r: impl io::BufRead) -> io::Result<PointCloud> {
    let mut points = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)))
            .collect::<io::Result<_>>()?;
        if vals.len() != 3 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, format!("expected 3 values, got {}", vals.len())));
        }
        points.push([vals[0], vals[1], vals[2]]);
    }
    Ok(PointCloud::new(points))
}

/// Header: magic, `u32` resolution, `u64` occupied count (all little endian),
/// then `u32` run lengths alternating empty/occupied, starting with empty.
pub fn write_voxels(mut w: impl Write, solid: &VoxelSolid) -> io::Result<()> {
    w.write_all(VOXEL_MAGIC)?;
    w.write_all(&(solid.resolution() as u32).to_le_bytes())?;
    w.write_all(&(solid.count() as u64).to_le_bytes())?;
    let mut current = false;
    let mut run = 0u32;
    for &c in solid.cells() {
        if c != current {
            w.write_all(&run.to_le_bytes())?;
            current = c;
            run = 0;
        }
        run += 1;
    }
    w.write_all(&run.to_le_bytes())
}

pub fn read_voxels(mut r: impl Read) -> io::Result<VoxelSolid> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[0..4] != VOXEL_MAGIC {
        return Err(bad("bad voxel magic"));
    }
    let res = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let total = res.checked_pow(3).ok_or_else(|| bad("resolution too large"))?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % 4 != 0 {
        return Err(bad("truncated run"));
    }
    let mut cells = Vec::with_capacity(total);
    let mut value = false;
    for chunk in body.chunks_exact(4) {
        let run = u32::from_le_bytes(chunk.try_into().unwrap()) as usize;
        if cells.len() + run > total {
            return Err(bad("runs exceed grid size"));
        }
        cells.extend(std::iter::repeat_n(value, run));
        value = !value;
    }
    if cells.len() != total {
        return Err(bad("runs do not cover the grid"));
    }
    let solid = VoxelSolid::from_cells(res, cells);
    if solid.count() != count {
        return Err(bad("occupied count does not match header"));
    }
    Ok(solid)
}

const GAP: usize = 2;

/// Binary PGM with three orthographic silhouettes side by side: front
/// (projected along y), top (along z) and side (along x). Occupied pixels are
/// black on white, separated by grey gaps.
pub fn silhouette_pgm(solid: &VoxelSolid) -> Vec<u8> {
    let (width, height, pixels) = silhouette_pixels(solid);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(&pixels);
    out
}

/// Grayscale composite as `(width, height, row-major pixels)`, top row first.
pub fn silhouette_pixels(solid: &VoxelSolid) -> (usize, usize, Vec<u8>) {
    let r = solid.resolution();
    let width = 3 * r + 2 * GAP;
    let mut pixels = vec![255u8; width * r];
    for panel in 0..3 {
        let x0 = panel * (r + GAP);
        if panel > 0 {
            for row in 0..r {
                for g in 0..GAP {
                    pixels[row * width + x0 - GAP + g] = 128;
                }
            }
        }
        for v in 0..r {
            for u in 0..r {
                let hit = (0..r).any(|d| match panel {
                    0 => solid.get(u, d, v),
                    1 => solid.get(u, v, d),
                    _ => solid.get(d, u, v),
                });
                if hit {
                    pixels[(r - 1 - v) * width + x0 + u] = 0;
                }
            }
        }
    }
    (width, r, pixels)
}
