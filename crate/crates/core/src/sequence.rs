//! Parsing and serialization of the text-token sequence format.
//!
//! Grammar:
//!
//! ```text
//! model     := pair+
//! pair      := sketch extrusion
//! sketch    := face+ <sketch_end>
//! face      := loop+ <face_end>
//! loop      := curve+ <loop_end>
//! curve     := (line | arc | circle) NUM* <curve_end>
//! extrusion := (add | cut | intersect) NUM{17}
//! ```

use crate::error::SemError;
use crate::model::{
    CadModel, Curve, CurveKind, Extrusion, Face, Loop, Point, Sketch, SketchExtrude, EXTRUSION_VALUES,
};
use crate::token::{tokenize, Token};

/// Parses a whitespace-separated token string into a model.
pub fn parse_sequence(text: &str) -> Result<CadModel, SemError> {
    let tokens = tokenize(text)?;
    Parser { tokens: &tokens, pos: 0 }.model()
}

/// Writes the canonical token string for a model.
pub fn serialize(model: &CadModel) -> Result<String, SemError> {
    check_invariants(model)?;
    Ok(to_tokens(model).iter().map(Token::to_string).collect::<Vec<_>>().join(" "))
}

/// Canonical form of a token string: the same words joined by single spaces.
pub fn canonicalize(text: &str) -> String {
    text.split_ascii_whitespace().collect::<Vec<_>>().join(" ")
}

/// Token stream of a model, without invariant checks.
pub fn to_tokens(model: &CadModel) -> Vec<Token> {
    let mut out = Vec::new();
    for pair in &model.pairs {
        for face in &pair.sketch.faces {
            for lp in &face.loops {
                for curve in &lp.curves {
                    out.push(Token::Curve(curve.kind()));
                    for p in curve.stored_points() {
                        out.push(Token::Num(p.x));
                        out.push(Token::Num(p.y));
                    }
                    out.push(Token::CurveEnd);
                }
                out.push(Token::LoopEnd);
            }
            out.push(Token::FaceEnd);
        }
        out.push(Token::SketchEnd);
        let ext = &pair.extrusion;
        out.push(Token::Bool(ext.op));
        out.extend(ext.values().iter().map(|&v| Token::Num(v)));
    }
    out
}

/// Structural invariants every serializable model satisfies.
pub fn check_invariants(model: &CadModel) -> Result<(), SemError> {
    let bad = |msg: String| Err(SemError::InvariantViolation(msg));
    if model.pairs.is_empty() {
        return bad("model has no sketch-extrusion pairs".into());
    }
    for (i, pair) in model.pairs.iter().enumerate() {
        if pair.sketch.faces.is_empty() {
            return bad(format!("pair {i}: sketch has no faces"));
        }
        for (j, face) in pair.sketch.faces.iter().enumerate() {
            if face.loops.is_empty() {
                return bad(format!("pair {i} face {j}: no loops"));
            }
            for (k, lp) in face.loops.iter().enumerate() {
                if lp.curves.is_empty() {
                    return bad(format!("pair {i} face {j} loop {k}: no curves"));
                }
                if lp.is_circle() && lp.curves.len() != 1 {
                    return bad(format!("pair {i} face {j} loop {k}: circle shares its loop"));
                }
                for c in &lp.curves {
                    if c.stored_points().iter().any(|p| !p.in_grid()) {
                        return bad(format!("pair {i} face {j} loop {k}: coordinate off grid"));
                    }
                }
            }
        }
        if pair.extrusion.values().iter().any(|&v| !crate::quant::in_grid(v)) {
            return bad(format!("pair {i}: extrusion value off grid"));
        }
    }
    Ok(())
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn unexpected(&self, expected: &'static str) -> SemError {
        match self.peek() {
            Some(t) => SemError::UnexpectedToken { index: self.pos, found: t.to_string(), expected },
            None => SemError::TruncatedSequence { expected },
        }
    }

    fn model(mut self) -> Result<CadModel, SemError> {
        let mut pairs = Vec::new();
        loop {
            match self.peek() {
                None if !pairs.is_empty() => break,
                _ => {
                    let sketch = self.sketch()?;
                    let extrusion = self.extrusion()?;
                    pairs.push(SketchExtrude { sketch, extrusion });
                }
            }
        }
        Ok(CadModel::new(pairs))
    }

    fn sketch(&mut self) -> Result<Sketch, SemError> {
        let mut faces = Vec::new();
        loop {
            match self.peek() {
                Some(Token::SketchEnd) => {
                    if faces.is_empty() {
                        return Err(SemError::EmptySketch { index: self.pos });
                    }
                    self.pos += 1;
                    return Ok(Sketch::new(faces));
                }
                Some(Token::Curve(_) | Token::LoopEnd | Token::FaceEnd) => faces.push(self.face()?),
                _ => return Err(self.unexpected("a curve or <sketch_end>")),
            }
        }
    }

    fn face(&mut self) -> Result<Face, SemError> {
        let mut loops = Vec::new();
        loop {
            match self.peek() {
                Some(Token::FaceEnd) => {
                    if loops.is_empty() {
                        return Err(SemError::EmptyFace { index: self.pos });
                    }
                    self.pos += 1;
                    return Ok(Face::new(loops));
                }
                Some(Token::Curve(_) | Token::LoopEnd) => loops.push(self.curve_loop()?),
                _ => return Err(self.unexpected("a curve or <face_end>")),
            }
        }
    }

    fn curve_loop(&mut self) -> Result<Loop, SemError> {
        let mut curves = Vec::new();
        loop {
            match self.peek() {
                Some(Token::LoopEnd) => {
                    let index = self.pos;
                    if curves.is_empty() {
                        return Err(SemError::EmptyLoop { index });
                    }
                    self.pos += 1;
                    let lp = Loop::new(curves);
                    if lp.is_circle() && lp.curves.len() > 1 {
                        return Err(SemError::MixedCircleLoop { index });
                    }
                    return Ok(lp);
                }
                Some(Token::Curve(kind)) => curves.push(self.curve(kind)?),
                _ => return Err(self.unexpected("a curve or <loop_end>")),
            }
        }
    }

    fn curve(&mut self, kind: CurveKind) -> Result<Curve, SemError> {
        let index = self.pos;
        self.pos += 1;
        let mut nums = Vec::new();
        while let Some(Token::Num(v)) = self.peek() {
            nums.push(v);
            self.pos += 1;
        }
        match self.peek() {
            Some(Token::CurveEnd) => self.pos += 1,
            _ => return Err(self.unexpected("<curve_end>")),
        }
        let expected = 2 * kind.arity();
        if nums.len() != expected {
            return Err(SemError::BadArity { index, kind, expected, found: nums.len() });
        }
        let points: Vec<Point> = nums.chunks(2).map(|c| Point::new(c[0], c[1])).collect();
        Ok(Curve::from_points(kind, &points).expect("arity checked"))
    }

    fn extrusion(&mut self) -> Result<Extrusion, SemError> {
        let index = self.pos;
        let op = match self.peek() {
            Some(Token::Bool(op)) => op,
            _ => return Err(self.unexpected("a boolean operation")),
        };
        self.pos += 1;
        let mut values = Vec::with_capacity(EXTRUSION_VALUES);
        while let Some(Token::Num(v)) = self.peek() {
            values.push(v);
            self.pos += 1;
        }
        let values: [u8; EXTRUSION_VALUES] = values
            .as_slice()
            .try_into()
            .map_err(|_| SemError::BadExtrusionRecord { index, found: values.len() + 1 })?;
        Ok(Extrusion::from_values(op, &values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build::{circle, rect, sketch_of};
    use crate::model::BooleanOp;

    const SQUARE: &str = "line 8 8 <curve_end> line 56 8 <curve_end> line 56 56 <curve_end> \
        line 8 56 <curve_end> <loop_end> <face_end> <sketch_end> \
        add 48 16 32 32 32 63 32 32 32 63 32 32 32 63 32 32 32";

    fn square() -> CadModel {
        CadModel::single(sketch_of(rect(8, 8, 56, 56)), Extrusion::straight(BooleanOp::Add, 16, 48))
    }

    #[test]
    fn minimal_square_parses() {
        let m = parse_sequence(SQUARE).unwrap();
        assert_eq!(m, square());
        assert_eq!(m.pairs.len(), 1);
        assert_eq!(m.pairs[0].sketch.faces[0].loops[0].curves.len(), 4);
        assert_eq!(serialize(&m).unwrap(), canonicalize(SQUARE));
    }

    #[test]
    fn constructed_square_reparses() {
        let text = serialize(&square()).unwrap();
        assert_eq!(parse_sequence(&text).unwrap(), square());
    }

    #[test]
    fn canonicalize_collapses_whitespace() {
        let messy = format!("  {}\n\t", SQUARE.replace(' ', "\n  "));
        assert_eq!(serialize(&parse_sequence(&messy).unwrap()).unwrap(), canonicalize(SQUARE));
    }

    #[test]
    fn two_pairs_emit_two_sketch_ends() {
        let mut m = square();
        m.pairs.push(SketchExtrude {
            sketch: sketch_of(circle(32, 32, 8)),
            extrusion: Extrusion::straight(BooleanOp::Cut, 20, 44),
        });
        let text = serialize(&m).unwrap();
        assert_eq!(text.matches("<sketch_end>").count(), 2);
        let words: Vec<&str> = text.split(' ').collect();
        let records = words.iter().filter(|w| BooleanOp::from_word(w).is_some()).count();
        assert_eq!(records, 2);
        for (i, w) in words.iter().enumerate() {
            if BooleanOp::from_word(w).is_some() {
                assert!(words[i + 1..].iter().take(17).all(|t| t.parse::<u8>().is_ok()));
            }
        }
    }

    #[test]
    fn short_extrusion_record() {
        let text = SQUARE.rsplit_once(' ').unwrap().0;
        assert!(matches!(parse_sequence(text), Err(SemError::BadExtrusionRecord { found: 17, .. })));
    }

    #[test]
    fn long_extrusion_record() {
        let text = format!("{SQUARE} 5");
        assert!(matches!(parse_sequence(&text), Err(SemError::BadExtrusionRecord { found: 19, .. })));
    }

    #[test]
    fn error_variants_are_reachable() {
        let cases: &[(&str, &str)] = &[
            ("line 8 8 <curve_end> foo", "UNKNOWN_TOKEN"),
            ("", "TRUNCATED_SEQUENCE"),
            ("line 8 8 <curve_end> <loop_end>", "TRUNCATED_SEQUENCE"),
            ("line 8 8 <curve_end> <loop_end> <face_end> <sketch_end>", "TRUNCATED_SEQUENCE"),
            ("line 8 <curve_end> <loop_end> <face_end> <sketch_end>", "BAD_ARITY"),
            ("circle 1 2 3 4 <curve_end> <loop_end> <face_end> <sketch_end>", "BAD_ARITY"),
            ("<loop_end> <face_end> <sketch_end>", "EMPTY_LOOP"),
            ("<face_end> <sketch_end>", "EMPTY_FACE"),
            ("<sketch_end> add", "EMPTY_SKETCH"),
            (
                "circle 32 24 40 32 32 40 24 32 <curve_end> line 1 1 <curve_end> <loop_end>",
                "MIXED_CIRCLE_LOOP",
            ),
            ("line 8 8 <loop_end>", "UNEXPECTED_TOKEN"),
            ("add 1 2", "UNEXPECTED_TOKEN"),
            ("line 8 8 <curve_end> <loop_end> <face_end> <sketch_end> line", "UNEXPECTED_TOKEN"),
        ];
        for (text, code) in cases {
            let err = parse_sequence(text).unwrap_err();
            assert_eq!(err.code(), *code, "{text:?} gave {err}");
        }
    }

    #[test]
    fn serialize_rejects_broken_models() {
        let mut m = square();
        m.pairs[0].sketch.faces[0].loops[0].curves.clear();
        assert!(matches!(serialize(&m), Err(SemError::InvariantViolation(_))));
        let mut m = square();
        m.pairs[0].extrusion.scale = 64;
        assert!(serialize(&m).is_err());
        assert!(serialize(&CadModel::new(vec![])).is_err());
    }
}
