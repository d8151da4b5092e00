//! Random structurally valid models for property tests and fuzzing.
//!
//! Models drawn here always serialize, but are not necessarily geometrically
//! valid (circles may not fit, loops may self-intersect).

use rand::Rng;

use crate::model::{BooleanOp, CadModel, Curve, Extrusion, Face, Loop, Point, Sketch, SketchExtrude};
use crate::quant::GRID;

fn point(rng: &mut impl Rng) -> Point {
    Point::new(rng.random_range(0..GRID), rng.random_range(0..GRID))
}

pub fn random_loop(rng: &mut impl Rng) -> Loop {
    if rng.random_bool(0.25) {
        return Loop::new(vec![Curve::Circle { points: [point(rng), point(rng), point(rng), point(rng)] }]);
    }
    let n = rng.random_range(1..=6);
    let curves = (0..n)
        .map(|_| {
            if rng.random_bool(0.3) {
                Curve::Arc { start: point(rng), mid: point(rng) }
            } else {
                Curve::Line { start: point(rng) }
            }
        })
        .collect();
    Loop::new(curves)
}

pub fn random_extrusion(rng: &mut impl Rng) -> Extrusion {
    let op = BooleanOp::ALL[rng.random_range(0..3)];
    let mut values = [0u8; 17];
    for v in &mut values {
        *v = rng.random_range(0..GRID);
    }
    Extrusion::from_values(op, &values)
}

pub fn random_model(rng: &mut impl Rng) -> CadModel {
    let pairs = (0..rng.random_range(1..=3))
        .map(|_| {
            let faces = (0..rng.random_range(1..=3))
                .map(|_| Face::new((0..rng.random_range(1..=3)).map(|_| random_loop(rng)).collect()))
                .collect();
            SketchExtrude { sketch: Sketch::new(faces), extrusion: random_extrusion(rng) }
        })
        .collect();
    CadModel::new(pairs)
}
