//! The closed token vocabulary of the sequence format.

use std::fmt;

use crate::error::SemError;
use crate::model::{BooleanOp, CurveKind};
use crate::quant::GRID;

pub const CURVE_END: &str = "<curve_end>";
pub const LOOP_END: &str = "<loop_end>";
pub const FACE_END: &str = "<face_end>";
pub const SKETCH_END: &str = "<sketch_end>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    Num(u8),
    Curve(CurveKind),
    Bool(BooleanOp),
    CurveEnd,
    LoopEnd,
    FaceEnd,
    SketchEnd,
}

impl Token {
    pub fn parse(word: &str) -> Option<Token> {
        Some(match word {
            CURVE_END => Token::CurveEnd,
            LOOP_END => Token::LoopEnd,
            FACE_END => Token::FaceEnd,
            SKETCH_END => Token::SketchEnd,
            "line" => Token::Curve(CurveKind::Line),
            "arc" => Token::Curve(CurveKind::Arc),
            "circle" => Token::Curve(CurveKind::Circle),
            w => {
                if let Some(op) = BooleanOp::from_word(w) {
                    Token::Bool(op)
                } else {
                    return parse_number(w).map(Token::Num);
                }
            }
        })
    }
}

/// Grid numbers are written in plain decimal without sign or leading zeros.
fn parse_number(w: &str) -> Option<u8> {
    if w.is_empty() || w.len() > 2 || !w.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if w.len() > 1 && w.starts_with('0') {
        return None;
    }
    let v: u8 = w.parse().ok()?;
    (v < GRID).then_some(v)
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "{v}"),
            Token::Curve(k) => f.write_str(k.word()),
            Token::Bool(op) => f.write_str(op.word()),
            Token::CurveEnd => f.write_str(CURVE_END),
            Token::LoopEnd => f.write_str(LOOP_END),
            Token::FaceEnd => f.write_str(FACE_END),
            Token::SketchEnd => f.write_str(SKETCH_END),
        }
    }
}

/// Splits on ASCII whitespace and maps every word to a token.
pub fn tokenize(text: &str) -> Result<Vec<Token>, SemError> {
    text.split_ascii_whitespace()
        .enumerate()
        .map(|(index, w)| {
            Token::parse(w).ok_or_else(|| SemError::UnknownToken { index, token: w.to_string() })
        })
        .collect()
}

/// Every token of the format as text, numbers first.
pub fn vocabulary() -> Vec<String> {
    let mut out: Vec<String> = (0..GRID).map(|v| v.to_string()).collect();
    out.extend([CURVE_END, LOOP_END, FACE_END, SKETCH_END].map(String::from));
    out.extend(CurveKind::ALL.map(|k| k.word().to_string()));
    out.extend(BooleanOp::ALL.map(|b| b.word().to_string()));
    out
}
