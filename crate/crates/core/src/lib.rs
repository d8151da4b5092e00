//! Sketch-and-extrude CAD models and their text-token sequence format.
//!
//! A [`CadModel`] is an ordered list of (sketch, extrusion) pairs in design
//! order. Sketches hold faces, faces hold loops, loops hold curves. The token
//! format is whitespace separated:
//!
//! ```text
//! line 8 8 <curve_end> line 56 8 <curve_end> line 56 56 <curve_end> line 8 56 <curve_end>
//! <loop_end> <face_end> <sketch_end>
//! add 48 16 32 32 32 63 32 32 32 63 32 32 32 63 32 32 32
//! ```
//!
//! Every extrusion record is a boolean word followed by exactly 17 quantized
//! values (`BVVTTTRRRRRRRRRSOO`).

pub mod dataset;
pub mod decode;
pub mod error;
pub mod geom;
pub mod model;
pub mod quant;
pub mod random;
pub mod sequence;
pub mod token;
pub mod validate;

pub use decode::{decode_command_arrays, CommandArrays, DecodeConfig};
pub use error::SemError;
pub use model::{BooleanOp, CadModel, Curve, CurveKind, Extrusion, Face, Loop, Point, Sketch, SketchExtrude};
pub use sequence::{canonicalize, parse_sequence, serialize};
pub use validate::{validate, Issue, Severity, ValidationReport};
