use sem_core::geom::GeomError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("first boolean operation must be add, found {0}")]
    FirstOpNotAdd(&'static str),
    #[error("pair {pair} face {face} loop {lp}: arc {curve} has a zero-length chord")]
    DegenerateArc { pair: usize, face: usize, lp: usize, curve: usize },
    #[error("pair {pair} face {face} loop {lp}: circle fit residual {residual:.3} exceeds tolerance")]
    CircleFitFailure { pair: usize, face: usize, lp: usize, residual: f64 },
    #[error("rotation matrix is not orthonormal (error {0:.4})")]
    RotationNotOrthonormal(f64),
    #[error("scale factor is zero")]
    ScaleNotPositive,
    #[error("resolution {0} is below the minimum of 8")]
    InvalidResolution(usize),
    #[error("voxel resolutions differ: {0} vs {1}")]
    ResolutionMismatch(usize, usize),
    #[error("solid is empty")]
    EmptySolid,
}

impl RenderError {
    pub fn code(&self) -> &'static str {
        match self {
            RenderError::FirstOpNotAdd(_) => "FIRST_OP_NOT_ADD",
            RenderError::DegenerateArc { .. } => "DEGENERATE_ARC",
            RenderError::CircleFitFailure { .. } => "CIRCLE_FIT_FAILURE",
            RenderError::RotationNotOrthonormal(_) => "ROTATION_NOT_ORTHONORMAL",
            RenderError::ScaleNotPositive => "SCALE_NOT_POSITIVE",
            RenderError::InvalidResolution(_) => "INVALID_RESOLUTION",
            RenderError::ResolutionMismatch(..) => "RESOLUTION_MISMATCH",
            RenderError::EmptySolid => "EMPTY_SOLID",
        }
    }

    pub(crate) fn from_geom(e: GeomError, pair: usize, face: usize, lp: usize) -> Self {
        match e {
            GeomError::DegenerateArc { curve } => RenderError::DegenerateArc { pair, face, lp, curve },
            GeomError::CircleFitFailure { residual } => RenderError::CircleFitFailure { pair, face, lp, residual },
        }
    }
}
