//! Closed prompt grammar with programmatic ground truth:
//! `a {large|small} {thin|thick} {square plate|round disc|rectangular plate}
//! with {one..four} {holes|pegs|pockets}`.
//!
//! Sizes are drawn at random within the bounds the adjectives allow, so one
//! prompt has many acceptable answers.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sem_core::dataset::SlRecord;
use sem_core::model::build::{circle, rect};
use sem_core::{serialize, BooleanOp, CadModel, Extrusion, Face, Loop, Sketch, SketchExtrude};

const CENTER: u8 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    Square,
    Disc,
    Rectangle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Feature {
    Holes,
    Pegs,
    Pockets,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Description {
    pub large: bool,
    pub thick: bool,
    pub base: Base,
    pub count: u8,
    pub feature: Feature,
}

const NUMBERS: [&str; 4] = ["one", "two", "three", "four"];

pub fn prompt_words() -> &'static [&'static str] {
    &[
        "a", "large", "small", "thin", "thick", "square", "round", "rectangular", "plate", "disc", "with", "one", "two",
        "three", "four", "hole", "holes", "peg", "pegs", "pocket", "pockets",
    ]
}

impl Description {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            large: rng.random(),
            thick: rng.random(),
            base: *[Base::Square, Base::Disc, Base::Rectangle].choose(rng).unwrap(),
            count: rng.random_range(1..=4),
            feature: *[Feature::Holes, Feature::Pegs, Feature::Pockets].choose(rng).unwrap(),
        }
    }

    pub fn text(&self) -> String {
        let size = if self.large { "large" } else { "small" };
        let depth = if self.thick { "thick" } else { "thin" };
        let base = match self.base {
            Base::Square => "square plate",
            Base::Disc => "round disc",
            Base::Rectangle => "rectangular plate",
        };
        let noun = match (self.feature, self.count) {
            (Feature::Holes, 1) => "hole",
            (Feature::Holes, _) => "holes",
            (Feature::Pegs, 1) => "peg",
            (Feature::Pegs, _) => "pegs",
            (Feature::Pockets, 1) => "pocket",
            (Feature::Pockets, _) => "pockets",
        };
        format!("a {size} {depth} {base} with {} {noun}", NUMBERS[self.count as usize - 1])
    }

    /// Draws concrete dimensions and builds the model.
    pub fn realize(&self, rng: &mut impl Rng) -> CadModel {
        let half: u8 = if self.large { rng.random_range(20..=26) } else { rng.random_range(12..=16) };
        let height: u8 = if self.thick { rng.random_range(8..=12) } else { rng.random_range(4..=6) };
        let half_y = match self.base {
            Base::Rectangle => half * 2 / 3,
            _ => half,
        };
        let outline = match self.base {
            Base::Disc => circle(CENTER, CENTER, half),
            _ => rect(CENTER - half, CENTER - half_y, CENTER + half, CENTER + half_y),
        };
        let radius = (half / 6).max(2);
        let spots = feature_spots(self.base, self.count, half, half_y);
        let top = CENTER + height;
        let plate = |loops: Vec<Loop>| SketchExtrude {
            sketch: Sketch::new(vec![Face::new(loops)]),
            extrusion: Extrusion::straight(BooleanOp::Add, CENTER, top),
        };
        let faces = |make: &dyn Fn(u8, u8) -> Loop| Sketch::new(spots.iter().map(|&(x, y)| Face::new(vec![make(x, y)])).collect());
        let pairs = match self.feature {
            Feature::Holes => {
                let mut loops = vec![outline];
                loops.extend(spots.iter().map(|&(x, y)| circle(x, y, radius)));
                vec![plate(loops)]
            }
            Feature::Pegs => vec![
                plate(vec![outline]),
                SketchExtrude {
                    sketch: faces(&|x, y| circle(x, y, radius)),
                    extrusion: Extrusion::straight(BooleanOp::Add, top, top + 4),
                },
            ],
            Feature::Pockets => vec![
                plate(vec![outline]),
                SketchExtrude {
                    sketch: faces(&|x, y| rect(x - radius, y - radius, x + radius, y + radius)),
                    extrusion: Extrusion::straight(BooleanOp::Cut, top - height.div_ceil(2), top),
                },
            ],
        };
        CadModel::new(pairs)
    }
}

/// Feature centers: along the x axis for up to three, a cross or grid for four.
fn feature_spots(base: Base, count: u8, half: u8, half_y: u8) -> Vec<(u8, u8)> {
    let a = half / 2;
    let b = half_y / 2;
    match count {
        1 => vec![(CENTER, CENTER)],
        2 => vec![(CENTER - a, CENTER), (CENTER + a, CENTER)],
        3 => vec![(CENTER - a, CENTER), (CENTER, CENTER), (CENTER + a, CENTER)],
        _ => match base {
            Base::Disc => vec![(CENTER - a, CENTER), (CENTER, CENTER - a), (CENTER + a, CENTER), (CENTER, CENTER + a)],
            _ => vec![(CENTER - a, CENTER - b), (CENTER + a, CENTER - b), (CENTER + a, CENTER + b), (CENTER - a, CENTER + b)],
        },
    }
}

/// One random prompt with one realization.
pub fn sample(rng: &mut impl Rng) -> (Description, SlRecord) {
    let d = Description::random(rng);
    let model = d.realize(rng);
    let sequence = serialize(&model).expect("grammar models satisfy the invariants");
    (d, SlRecord { text: d.text(), sequence })
}

pub fn dataset(n: usize, seed: u64) -> Vec<SlRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample(&mut rng).1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use render::is_renderable;
    use sem_core::parse_sequence;

    #[test]
    fn every_description_renders() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let (d, rec) = sample(&mut rng);
            let m = parse_sequence(&rec.sequence).unwrap();
            let r = is_renderable(&m);
            assert!(r.is_valid, "{}: {r}", d.text());
            assert!(r.issues.is_empty(), "{}: {r}", d.text());
        }
    }

    #[test]
    fn text_uses_known_words() {
        let words = prompt_words();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let d = Description::random(&mut rng);
            assert!(d.text().split(' ').all(|w| words.contains(&w)));
        }
        let d = Description { large: false, thick: true, base: Base::Disc, count: 1, feature: Feature::Pegs };
        assert_eq!(d.text(), "a small thick round disc with one peg");
    }

    #[test]
    fn dataset_is_seeded() {
        assert_eq!(dataset(20, 5), dataset(20, 5));
        assert_ne!(dataset(20, 5), dataset(20, 6));
    }

    #[test]
    fn feature_counts_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for count in 1..=4 {
            let d = Description { large: true, thick: false, base: Base::Square, count, feature: Feature::Holes };
            let m = d.realize(&mut rng);
            assert_eq!(m.count_curves(sem_core::CurveKind::Circle), count as usize);
        }
    }
}
