//! Decoding of the padded command-array representation.
//!
//! The source representation stores a sketch as three arrays: `se_cmd`
//! (commands), `se_xy` (padded coordinates, with one separator slot after each
//! command's points) and `se_ext` (extrusion records of 18 numbers: an
//! operation id followed by 17 padded values). Commands consume `se_xy`
//! positions as follows:
//!
//! | command | meaning     | points used | positions skipped |
//! |---------|-------------|-------------|-------------------|
//! | 5       | circle      | 4           | 5                 |
//! | 4       | arc         | 2           | 3                 |
//! | 3       | line        | 1           | 2                 |
//! | 2       | loop end    | 0           | 1                 |
//! | 1       | face end    | 0           | 1                 |
//! | 0       | sketch end  | 0           | 1                 |
//!
//! Decoding writes the equivalent token string and parses it, so the decoded
//! model always satisfies the same structural rules as parsed text.

use serde::{Deserialize, Serialize};

use crate::error::SemError;
use crate::model::{BooleanOp, CadModel, EXTRUSION_VALUES};
use crate::quant::GRID;
use crate::sequence::parse_sequence;
use crate::token::{CURVE_END, FACE_END, LOOP_END, SKETCH_END};

/// Length of one extrusion record in `se_ext`.
pub const EXT_RECORD_LEN: usize = 1 + EXTRUSION_VALUES;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecodeConfig {
    /// Offset added to every coordinate in `se_xy`.
    pub xy_pad: i64,
    /// Offset added to every numeric extrusion value in `se_ext`.
    pub ext_pad: i64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self { xy_pad: 4, ext_pad: 1 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandArrays {
    pub se_cmd: Vec<i64>,
    pub se_xy: Vec<[i64; 2]>,
    pub se_ext: Vec<i64>,
}

/// Operation ids: new body and join both become `add`.
fn operation(record: usize, id: i64) -> Result<BooleanOp, SemError> {
    match id {
        0 | 1 => Ok(BooleanOp::Add),
        2 => Ok(BooleanOp::Cut),
        3 => Ok(BooleanOp::Intersect),
        value => Err(SemError::UnknownOperation { record, value }),
    }
}

fn unpad(value: i64, pad: i64, location: impl FnOnce() -> String) -> Result<u8, SemError> {
    let v = value - pad;
    if (0..GRID as i64).contains(&v) {
        Ok(v as u8)
    } else {
        Err(SemError::ValueOutOfRange { location: location(), value: v })
    }
}

/// Converts command arrays into the token string, without parsing it.
pub fn decode_to_text(
    se_cmd: &[i64],
    se_xy: &[[i64; 2]],
    se_ext: &[i64],
    cfg: DecodeConfig,
) -> Result<String, SemError> {
    if se_ext.len() % EXT_RECORD_LEN != 0 {
        return Err(SemError::BadExtrusionRecord { index: 0, found: se_ext.len() % EXT_RECORD_LEN });
    }
    let records = se_ext.len() / EXT_RECORD_LEN;
    let sketches = se_cmd.iter().filter(|&&c| c == 0).count();
    if sketches != records {
        return Err(SemError::PairCountMismatch { sketches, records });
    }

    let mut words: Vec<String> = Vec::new();
    let mut pos = 0usize;
    let mut record = 0usize;
    for &cmd in se_cmd {
        let (points, skip) = match cmd {
            5 => (4, 5),
            4 => (2, 3),
            3 => (1, 2),
            0..=2 => (0, 1),
            value => return Err(SemError::UnknownCommand { position: pos, value }),
        };
        let remaining = se_xy.len() - pos;
        if skip > remaining {
            return Err(SemError::SkipOverrun { position: pos, command: cmd, needed: skip, remaining });
        }
        match cmd {
            5 | 4 | 3 => {
                words.push(["", "", "", "line", "arc", "circle"][cmd as usize].to_string());
                for (offset, xy) in se_xy[pos..pos + points].iter().enumerate() {
                    for (axis, &value) in xy.iter().enumerate() {
                        let v = unpad(value, cfg.xy_pad, || format!("se_xy[{}][{axis}]", pos + offset))?;
                        words.push(v.to_string());
                    }
                }
                words.push(CURVE_END.to_string());
            }
            2 => words.push(LOOP_END.to_string()),
            1 => words.push(FACE_END.to_string()),
            _ => {
                words.push(SKETCH_END.to_string());
                let rec = &se_ext[record * EXT_RECORD_LEN..(record + 1) * EXT_RECORD_LEN];
                words.push(operation(record, rec[0])?.word().to_string());
                for (i, &value) in rec[1..].iter().enumerate() {
                    let v = unpad(value, cfg.ext_pad, || format!("se_ext[{}]", record * EXT_RECORD_LEN + 1 + i))?;
                    words.push(v.to_string());
                }
                record += 1;
            }
        }
        pos += skip;
    }
    if pos != se_xy.len() {
        return Err(SemError::TrailingPositions { remaining: se_xy.len() - pos });
    }
    Ok(words.join(" "))
}

/// Decodes command arrays into a model, one pair per sketch-end command.
pub fn decode_command_arrays(
    se_cmd: &[i64],
    se_xy: &[[i64; 2]],
    se_ext: &[i64],
    cfg: DecodeConfig,
) -> Result<CadModel, SemError> {
    parse_sequence(&decode_to_text(se_cmd, se_xy, se_ext, cfg)?)
}

impl CommandArrays {
    pub fn decode(&self, cfg: DecodeConfig) -> Result<CadModel, SemError> {
        decode_command_arrays(&self.se_cmd, &self.se_xy, &self.se_ext, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Curve, Point};

    const F: [i64; 2] = [0, 0];

    fn ext(op: i64) -> Vec<i64> {
        // identity extrusion from 16 to 48, padded by one
        vec![op, 49, 17, 33, 33, 33, 64, 33, 33, 33, 64, 33, 33, 33, 64, 33, 33, 33]
    }

    #[test]
    fn square_of_lines() {
        let xy = vec![[12, 12], F, [60, 12], F, [60, 60], F, [12, 60], F, F, F, F];
        let m = decode_command_arrays(&[3, 3, 3, 3, 2, 1, 0], &xy, &ext(0), DecodeConfig::default()).unwrap();
        let lp = &m.pairs[0].sketch.faces[0].loops[0];
        assert_eq!(lp.curves.len(), 4);
        assert_eq!(lp.curves[1], Curve::Line { start: Point::new(56, 8) });
        assert_eq!(m.pairs[0].extrusion.extent_top, 48);
        assert_eq!(m.pairs[0].extrusion.extent_bottom, 16);
    }

    #[test]
    fn single_circle() {
        let xy = vec![[36, 26], [46, 36], [36, 46], [26, 36], F, F, F, F];
        let m = decode_command_arrays(&[5, 2, 1, 0], &xy, &ext(2), DecodeConfig::default()).unwrap();
        let lp = &m.pairs[0].sketch.faces[0].loops[0];
        assert_eq!(lp.curves.len(), 1);
        assert!(matches!(lp.curves[0], Curve::Circle { .. }));
        assert_eq!(m.pairs[0].extrusion.op, BooleanOp::Cut);
    }

    #[test]
    fn unknown_command() {
        let err = decode_command_arrays(&[7, 0], &[F, F], &ext(0), DecodeConfig::default()).unwrap_err();
        assert_eq!(err, SemError::UnknownCommand { position: 0, value: 7 });
    }

    #[test]
    fn skip_overrun() {
        let xy = vec![[36, 26], [46, 36], [36, 46], [26, 36]];
        let err = decode_command_arrays(&[5, 2, 1, 0], &xy, &ext(0), DecodeConfig::default()).unwrap_err();
        assert!(matches!(err, SemError::SkipOverrun { command: 5, needed: 5, remaining: 4, .. }));
    }

    #[test]
    fn trailing_positions() {
        let xy = vec![[36, 26], [46, 36], [36, 46], [26, 36], F, F, F, F, F];
        let err = decode_command_arrays(&[5, 2, 1, 0], &xy, &ext(0), DecodeConfig::default()).unwrap_err();
        assert_eq!(err, SemError::TrailingPositions { remaining: 1 });
    }
}
