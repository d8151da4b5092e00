//! Deterministic geometric scorer. Each candidate gets three sub-scores out
//! of 10, one per grading criterion: overall shape (Chamfer distance of the
//! normalized surface samples), component count (primitive count agreement)
//! and placement (voxel IoU). The score is their mean.

use render::{assemble, render_report, sample_points, PointCloud, VoxelSolid, PROBE_RESOLUTION};
use serde::{Deserialize, Serialize};
use sem_core::{parse_sequence, CadModel, CurveKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub resolution: usize,
    pub points: usize,
    /// Chamfer distance at which the shape sub-score reaches zero.
    pub cd_scale: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { resolution: 32, points: 512, cd_scale: 0.05, seed: 42 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubScores {
    pub shape_quality: f64,
    pub shape_quantity: f64,
    pub distribution: f64,
}

impl SubScores {
    pub const ZERO: SubScores = SubScores { shape_quality: 0.0, shape_quantity: 0.0, distribution: 0.0 };

    pub fn mean(&self) -> f64 {
        (self.shape_quality + self.shape_quantity + self.distribution) / 3.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub sequence: String,
    pub score: f64,
    /// Parses and renders to a non-empty solid.
    pub valid: bool,
    pub parsed: bool,
    /// Per-criterion breakdown; absent for scorers that only give a total.
    pub sub_scores: Option<SubScores>,
}

impl ScoredCandidate {
    pub fn invalid(sequence: &str, parsed: bool) -> Self {
        Self { sequence: sequence.to_string(), score: 0.0, valid: false, parsed, sub_scores: Some(SubScores::ZERO) }
    }
}

/// Curve counts per kind, in [`CurveKind::ALL`] order.
pub fn curve_counts(model: &CadModel) -> [usize; 3] {
    CurveKind::ALL.map(|k| model.count_curves(k))
}

/// `10 · (1 − Σ|c − r| / Σ max(c, r))` over curve kinds.
pub fn quantity_score(candidate: [usize; 3], reference: [usize; 3]) -> f64 {
    let diff: usize = candidate.iter().zip(&reference).map(|(c, r)| c.abs_diff(*r)).sum();
    let total: usize = candidate.iter().zip(&reference).map(|(c, r)| *c.max(r)).sum();
    if total == 0 {
        return 10.0;
    }
    10.0 * (1.0 - diff as f64 / total as f64)
}

/// Rendered form of a candidate or reference.
#[derive(Clone, Debug)]
pub struct Rendered {
    pub solid: VoxelSolid,
    pub cloud: PointCloud,
    pub counts: [usize; 3],
}

impl Rendered {
    /// `None` when the model is not renderable.
    pub fn new(model: &CadModel, cfg: &OracleConfig) -> Option<Rendered> {
        if !render_report(model, PROBE_RESOLUTION).0.is_valid {
            return None;
        }
        let solid = assemble(model, cfg.resolution).ok()?;
        let cloud = sample_points(&solid, cfg.points, cfg.seed).ok()?;
        Some(Rendered { solid, cloud, counts: curve_counts(model) })
    }
}

pub fn sub_scores(candidate: &Rendered, reference: &Rendered, cfg: &OracleConfig) -> SubScores {
    let cd = metrics::chamfer(&candidate.cloud, &reference.cloud).unwrap_or(f64::INFINITY);
    SubScores {
        shape_quality: 10.0 * (1.0 - cd / cfg.cd_scale).max(0.0),
        shape_quantity: quantity_score(candidate.counts, reference.counts),
        distribution: 10.0 * candidate.solid.iou(&reference.solid).unwrap_or(0.0),
    }
}

/// Scores candidate text against an already rendered reference.
pub fn score_against(candidate: &str, reference: &Rendered, cfg: &OracleConfig) -> ScoredCandidate {
    let Ok(model) = parse_sequence(candidate) else {
        return ScoredCandidate::invalid(candidate, false);
    };
    let Some(rendered) = Rendered::new(&model, cfg) else {
        return ScoredCandidate::invalid(candidate, true);
    };
    let subs = sub_scores(&rendered, reference, cfg);
    ScoredCandidate { sequence: candidate.to_string(), score: subs.mean(), valid: true, parsed: true, sub_scores: Some(subs) }
}

/// Scores a candidate against a reference model; `None` if the reference
/// itself does not render.
pub fn score_oracle(candidate: &str, reference: &CadModel, cfg: &OracleConfig) -> Option<ScoredCandidate> {
    let reference = Rendered::new(reference, cfg)?;
    Some(score_against(candidate, &reference, cfg))
}
