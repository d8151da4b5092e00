use serde::{Deserialize, Serialize};
use sem_core::{BooleanOp, CadModel, CurveKind};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub const ZERO: Prf = Prf { precision: 0.0, recall: 0.0, f1: 0.0 };

    /// Counts are matched greedily: `min(gen, gt)` true positives. When a type
    /// is absent from both sides the score is perfect.
    pub fn from_counts(matched: usize, generated: usize, reference: usize) -> Prf {
        if generated == 0 && reference == 0 {
            return Prf { precision: 1.0, recall: 1.0, f1: 1.0 };
        }
        let ratio = |n: usize| if n == 0 { 0.0 } else { matched as f64 / n as f64 };
        let (p, r) = (ratio(generated), ratio(reference));
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        Prf { precision: p, recall: r, f1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Breakdown {
    pub line: Prf,
    pub arc: Prf,
    pub circle: Prf,
    pub extrusion: Prf,
    pub sketch_avg: f64,
}

impl F1Breakdown {
    /// Scores of a generation that could not be parsed.
    pub const FAILED: F1Breakdown =
        F1Breakdown { line: Prf::ZERO, arc: Prf::ZERO, circle: Prf::ZERO, extrusion: Prf::ZERO, sketch_avg: 0.0 };

    pub fn curve(&self, kind: CurveKind) -> Prf {
        match kind {
            CurveKind::Line => self.line,
            CurveKind::Arc => self.arc,
            CurveKind::Circle => self.circle,
        }
    }
}

fn op_counts(m: &CadModel) -> [usize; 3] {
    let mut c = [0; 3];
    for e in m.extrusions() {
        c[BooleanOp::ALL.iter().position(|&o| o == e.op).unwrap()] += 1;
    }
    c
}

/// Count-based primitive matching. Extrusions match only with the same
/// boolean operation.
pub fn f1_primitives(generated: &CadModel, reference: &CadModel) -> F1Breakdown {
    let curve = |kind| {
        let (g, r) = (generated.count_curves(kind), reference.count_curves(kind));
        Prf::from_counts(g.min(r), g, r)
    };
    let (line, arc, circle) = (curve(CurveKind::Line), curve(CurveKind::Arc), curve(CurveKind::Circle));
    let (go, ro) = (op_counts(generated), op_counts(reference));
    let matched = go.iter().zip(&ro).map(|(a, b)| a.min(b)).sum();
    let extrusion = Prf::from_counts(matched, go.iter().sum(), ro.iter().sum());
    F1Breakdown { line, arc, circle, extrusion, sketch_avg: (line.f1 + arc.f1 + circle.f1) / 3.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sem_core::model::build::{circle, polygon, rect, sketch_of};
    use sem_core::{Extrusion, Face, Sketch, SketchExtrude};

    fn add(sketch: Sketch) -> SketchExtrude {
        SketchExtrude { sketch, extrusion: Extrusion::straight(BooleanOp::Add, 16, 48) }
    }

    #[test]
    fn identity_is_perfect() {
        let m = CadModel::new(vec![add(sketch_of(rect(8, 8, 56, 56)))]);
        let f = f1_primitives(&m, &m);
        assert_eq!(f.sketch_avg, 1.0);
        assert_eq!(f.extrusion.f1, 1.0);
    }

    #[test]
    fn two_lines_and_circle_against_three_lines() {
        let generated = CadModel::new(vec![
            add(sketch_of(polygon(&[(8, 8), (40, 8)]))),
            add(sketch_of(circle(32, 32, 8))),
        ]);
        let reference = CadModel::new(vec![add(sketch_of(polygon(&[(8, 8), (40, 8), (8, 40)])))]);
        let f = f1_primitives(&generated, &reference);
        assert!((f.line.f1 - 0.8).abs() < 1e-12);
        assert_eq!(f.line.precision, 1.0);
        assert_eq!(f.circle.f1, 0.0);
        assert_eq!(f.arc.f1, 1.0);
        // one generated add of two matches the single reference add
        assert!((f.extrusion.f1 - 2.0 * 0.5 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn extrusion_ops_must_agree() {
        let s = || Sketch::new(vec![Face::new(vec![rect(8, 8, 56, 56)])]);
        let a = CadModel::new(vec![
            add(s()),
            SketchExtrude { sketch: s(), extrusion: Extrusion::straight(BooleanOp::Cut, 16, 48) },
        ]);
        let b = CadModel::new(vec![add(s()), add(s())]);
        let f = f1_primitives(&a, &b);
        assert!((f.extrusion.f1 - 0.5).abs() < 1e-12);
    }
}
