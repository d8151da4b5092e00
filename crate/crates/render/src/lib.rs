//! Rendering of parametric sequences into voxel solids and point clouds.
//!
//! The pipeline is `rasterize_sketch` (sketch to 2D occupancy), `extrude`
//! (profile to a voxelized prism in the `[-1, 1]³` world cube), `assemble`
//! (boolean fold over all pairs) and `sample_points` (surface point cloud).
//! Nothing here is differentiable.

mod assemble;
mod error;
pub mod export;
mod extrude;
mod raster;
mod sample;
mod voxel;

pub use assemble::{assemble, is_renderable, render_report, PROBE_RESOLUTION};
pub use error::RenderError;
pub use extrude::extrude;
pub use raster::{rasterize_sketch, Region2D};
pub use sample::{sample_points, sample_surface, PointCloud};
pub use voxel::VoxelSolid;

/// Sketch rasterization resolution used by [`assemble`].
pub const SKETCH_RESOLUTION: usize = 128;

/// Default voxel resolution for rendering.
pub const SOLID_RESOLUTION: usize = 64;

/// Default number of sampled surface points.
pub const DEFAULT_POINTS: usize = 2048;
