//! Domain types for sketch-and-extrude models.

use serde::{Deserialize, Serialize};

use crate::quant;

/// A quantized sketch-plane coordinate on the `0..64` grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u8; 2]", into = "[u8; 2]")]
pub struct Point {
    pub x: u8,
    pub y: u8,
}

impl Point {
    pub const fn new(x: u8, y: u8) -> Self {
        Self { x, y }
    }

    pub fn in_grid(self) -> bool {
        quant::in_grid(self.x) && quant::in_grid(self.y)
    }

    pub fn to_f64(self) -> [f64; 2] {
        [self.x as f64, self.y as f64]
    }
}

impl From<[u8; 2]> for Point {
    fn from([x, y]: [u8; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [u8; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Line,
    Arc,
    Circle,
}

impl CurveKind {
    pub const ALL: [CurveKind; 3] = [CurveKind::Line, CurveKind::Arc, CurveKind::Circle];

    /// Number of stored points for this primitive.
    pub fn arity(self) -> usize {
        match self {
            CurveKind::Line => 1,
            CurveKind::Arc => 2,
            CurveKind::Circle => 4,
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            CurveKind::Line => "line",
            CurveKind::Arc => "arc",
            CurveKind::Circle => "circle",
        }
    }
}

/// A sketch primitive. Lines and arcs only store their leading points; their
/// end is the first point of the next curve in the loop (wrapping to the
/// loop's first curve).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr", into = "CurveRepr")]
pub enum Curve {
    Line { start: Point },
    Arc { start: Point, mid: Point },
    Circle { points: [Point; 4] },
}

impl Curve {
    pub fn kind(&self) -> CurveKind {
        match self {
            Curve::Line { .. } => CurveKind::Line,
            Curve::Arc { .. } => CurveKind::Arc,
            Curve::Circle { .. } => CurveKind::Circle,
        }
    }

    /// All stored points in token order.
    pub fn stored_points(&self) -> Vec<Point> {
        match *self {
            Curve::Line { start } => vec![start],
            Curve::Arc { start, mid } => vec![start, mid],
            Curve::Circle { points } => points.to_vec(),
        }
    }

    /// First point of the curve, i.e. where the previous curve ends.
    pub fn first_point(&self) -> Point {
        match *self {
            Curve::Line { start } | Curve::Arc { start, .. } => start,
            Curve::Circle { points } => points[0],
        }
    }

    /// Builds a curve from a kind and its stored points; `None` on arity mismatch.
    pub fn from_points(kind: CurveKind, points: &[Point]) -> Option<Curve> {
        if points.len() != kind.arity() {
            return None;
        }
        Some(match kind {
            CurveKind::Line => Curve::Line { start: points[0] },
            CurveKind::Arc => Curve::Arc { start: points[0], mid: points[1] },
            CurveKind::Circle => Curve::Circle { points: [points[0], points[1], points[2], points[3]] },
        })
    }
}

#[derive(Serialize, Deserialize)]
struct CurveRepr {
    kind: CurveKind,
    points: Vec<Point>,
}

impl TryFrom<CurveRepr> for Curve {
    type Error = String;

    fn try_from(r: CurveRepr) -> Result<Self, Self::Error> {
        Curve::from_points(r.kind, &r.points).ok_or_else(|| {
            format!("{} expects {} points, got {}", r.kind.word(), r.kind.arity(), r.points.len())
        })
    }
}

impl From<Curve> for CurveRepr {
    fn from(c: Curve) -> Self {
        CurveRepr { kind: c.kind(), points: c.stored_points() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Loop {
    pub curves: Vec<Curve>,
}

impl Loop {
    pub fn new(curves: Vec<Curve>) -> Self {
        Self { curves }
    }

    pub fn is_circle(&self) -> bool {
        self.curves.iter().any(|c| c.kind() == CurveKind::Circle)
    }
}

/// A face: the first loop is the outer boundary, later loops are holes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Face {
    pub loops: Vec<Loop>,
}

impl Face {
    pub fn new(loops: Vec<Loop>) -> Self {
        Self { loops }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sketch {
    pub faces: Vec<Face>,
}

impl Sketch {
    pub fn new(faces: Vec<Face>) -> Self {
        Self { faces }
    }

    pub fn curves(&self) -> impl Iterator<Item = &Curve> {
        self.faces.iter().flat_map(|f| f.loops.iter()).flat_map(|l| l.curves.iter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BooleanOp {
    Add,
    Cut,
    Intersect,
}

impl BooleanOp {
    pub const ALL: [BooleanOp; 3] = [BooleanOp::Add, BooleanOp::Cut, BooleanOp::Intersect];

    pub fn word(self) -> &'static str {
        match self {
            BooleanOp::Add => "add",
            BooleanOp::Cut => "cut",
            BooleanOp::Intersect => "intersect",
        }
    }

    pub fn from_word(w: &str) -> Option<Self> {
        match w {
            "add" => Some(BooleanOp::Add),
            "cut" => Some(BooleanOp::Cut),
            "intersect" => Some(BooleanOp::Intersect),
            _ => None,
        }
    }
}

/// Number of numeric fields after the boolean word in an extrusion record.
pub const EXTRUSION_VALUES: usize = 17;

/// One `BVVTTTRRRRRRRRRSOO` extrusion record. All numeric fields are grid
/// values; see [`crate::quant`] for how each field dequantizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Extrusion {
    pub op: BooleanOp,
    pub extent_top: u8,
    pub extent_bottom: u8,
    pub translation: [u8; 3],
    /// Row-major 3x3 rotation matrix.
    pub rotation: [u8; 9],
    pub scale: u8,
    pub scale_center: Point,
}

impl Extrusion {
    pub const IDENTITY_ROTATION: [u8; 9] = [
        quant::ROT_POS, quant::ROT_ZERO, quant::ROT_ZERO,
        quant::ROT_ZERO, quant::ROT_POS, quant::ROT_ZERO,
        quant::ROT_ZERO, quant::ROT_ZERO, quant::ROT_POS,
    ];

    /// An untransformed extrusion between the two given signed extents.
    pub fn straight(op: BooleanOp, extent_bottom: u8, extent_top: u8) -> Self {
        Self {
            op,
            extent_top,
            extent_bottom,
            translation: [quant::SIGNED_ZERO; 3],
            rotation: Self::IDENTITY_ROTATION,
            scale: quant::UNIT_SCALE,
            scale_center: Point::new(32, 32),
        }
    }

    /// The 17 numeric fields in record order.
    pub fn values(&self) -> [u8; EXTRUSION_VALUES] {
        let mut v = [0u8; EXTRUSION_VALUES];
        v[0] = self.extent_top;
        v[1] = self.extent_bottom;
        v[2..5].copy_from_slice(&self.translation);
        v[5..14].copy_from_slice(&self.rotation);
        v[14] = self.scale;
        v[15] = self.scale_center.x;
        v[16] = self.scale_center.y;
        v
    }

    pub fn from_values(op: BooleanOp, v: &[u8; EXTRUSION_VALUES]) -> Self {
        let mut translation = [0u8; 3];
        translation.copy_from_slice(&v[2..5]);
        let mut rotation = [0u8; 9];
        rotation.copy_from_slice(&v[5..14]);
        Self {
            op,
            extent_top: v[0],
            extent_bottom: v[1],
            translation,
            rotation,
            scale: v[14],
            scale_center: Point::new(v[15], v[16]),
        }
    }

    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        let r = |i: usize| quant::rotation_entry(self.rotation[i]);
        [[r(0), r(1), r(2)], [r(3), r(4), r(5)], [r(6), r(7), r(8)]]
    }

    /// Largest absolute entry of `R Rᵀ - I`.
    pub fn orthonormality_error(&self) -> f64 {
        let m = self.rotation_matrix();
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[i][k] * m[j][k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn translation_world(&self) -> [f64; 3] {
        self.translation.map(quant::signed)
    }

    /// Dequantized `(bottom, top)` plane offsets along the sketch normal.
    pub fn extents(&self) -> (f64, f64) {
        (quant::signed(self.extent_bottom), quant::signed(self.extent_top))
    }

    pub fn scale_factor(&self) -> f64 {
        quant::scale(self.scale)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SketchExtrude {
    pub sketch: Sketch,
    pub extrusion: Extrusion,
}

/// A parametric sequence: (sketch, extrusion) pairs in design order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CadModel {
    pub pairs: Vec<SketchExtrude>,
}

impl CadModel {
    pub fn new(pairs: Vec<SketchExtrude>) -> Self {
        Self { pairs }
    }

    pub fn single(sketch: Sketch, extrusion: Extrusion) -> Self {
        Self { pairs: vec![SketchExtrude { sketch, extrusion }] }
    }

    pub fn curves(&self) -> impl Iterator<Item = &Curve> {
        self.pairs.iter().flat_map(|p| p.sketch.curves())
    }

    pub fn count_curves(&self, kind: CurveKind) -> usize {
        self.curves().filter(|c| c.kind() == kind).count()
    }

    pub fn extrusions(&self) -> impl Iterator<Item = &Extrusion> {
        self.pairs.iter().map(|p| &p.extrusion)
    }
}

/// Convenience builders used by tests and the synthetic corpus.
pub mod build {
    use super::*;

    /// A closed polygon of lines through the given vertices.
    pub fn polygon(vertices: &[(u8, u8)]) -> Loop {
        Loop::new(vertices.iter().map(|&(x, y)| Curve::Line { start: Point::new(x, y) }).collect())
    }

    /// Axis-aligned rectangle loop, counter-clockwise from the lower-left corner.
    pub fn rect(x0: u8, y0: u8, x1: u8, y1: u8) -> Loop {
        polygon(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    }

    /// Circle through its four cardinal points.
    pub fn circle(cx: u8, cy: u8, r: u8) -> Loop {
        Loop::new(vec![Curve::Circle {
            points: [
                Point::new(cx, cy - r),
                Point::new(cx + r, cy),
                Point::new(cx, cy + r),
                Point::new(cx - r, cy),
            ],
        }])
    }

    /// A one-face, one-loop sketch.
    pub fn sketch_of(lp: Loop) -> Sketch {
        Sketch::new(vec![Face::new(vec![lp])])
    }
}
