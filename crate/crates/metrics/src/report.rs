use rayon::prelude::*;
use render::{render_report, sample_points, PointCloud, PROBE_RESOLUTION};
use serde::{Deserialize, Serialize};
use sem_core::dataset::SlRecord;
use sem_core::parse_sequence;

use crate::chamfer::chamfer;
use crate::error::MetricsError;
use crate::f1::{f1_primitives, F1Breakdown};
use crate::set::{chamfer_matrix, coverage_from_matrix, jsd, mmd_from_matrix, JSD_GRID};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub points: usize,
    pub resolution: usize,
    pub jsd_grid: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { points: render::DEFAULT_POINTS, resolution: render::SOLID_RESOLUTION, jsd_grid: JSD_GRID, seed: 42 }
    }
}

/// Aggregate scores in the usual table order. Distances use squared-point
/// Chamfer, summed over both directions; `*_x1000` fields are scaled by 10³.
/// Entries that need at least one rendered generation are `null` otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub f1_sketch: f64,
    pub f1_extrusion: f64,
    pub cd_x1000: Option<f64>,
    pub cov: Option<f64>,
    pub mmd_x1000: Option<f64>,
    pub jsd: Option<f64>,
    pub ir: f64,
    pub n: usize,
    pub cd: Option<f64>,
    pub mmd: Option<f64>,
    pub n_rendered: usize,
}

struct Scored {
    f1: F1Breakdown,
    invalid: bool,
    generated: Option<PointCloud>,
    reference: Option<PointCloud>,
}

fn cloud(text: &str, cfg: &EvalConfig) -> (bool, Option<PointCloud>) {
    let Ok(model) = parse_sequence(text) else { return (false, None) };
    let renderable = render_report(&model, PROBE_RESOLUTION).0.is_valid;
    if !renderable {
        return (false, None);
    }
    let solid = render_report(&model, cfg.resolution).1;
    (true, solid.and_then(|s| sample_points(&s, cfg.points, cfg.seed).ok()))
}

fn score(generated: &str, reference: &str, cfg: &EvalConfig) -> Scored {
    let f1 = match (parse_sequence(generated), parse_sequence(reference)) {
        (Ok(g), Ok(r)) => f1_primitives(&g, &r),
        _ => F1Breakdown::FAILED,
    };
    let (valid, gen_cloud) = cloud(generated, cfg);
    let (_, ref_cloud) = cloud(reference, cfg);
    Scored { f1, invalid: !valid, generated: gen_cloud, reference: ref_cloud }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Scores generations against references paired by position; both lists
/// must carry the same prompts in the same order.
pub fn evaluate(generated: &[SlRecord], reference: &[SlRecord], cfg: &EvalConfig) -> Result<EvalReport, MetricsError> {
    if generated.len() != reference.len() {
        return Err(MetricsError::LengthMismatch { generated: generated.len(), reference: reference.len() });
    }
    if generated.is_empty() {
        return Err(MetricsError::EmptySet("generated"));
    }
    if let Some(index) = generated.iter().zip(reference).position(|(g, r)| g.text != r.text) {
        return Err(MetricsError::RecordMismatch { index });
    }
    let scored: Vec<Scored> = generated
        .par_iter()
        .zip(reference.par_iter())
        .map(|(g, r)| score(&g.sequence, &r.sequence, cfg))
        .collect();
    let n = scored.len();
    let f1_sketch = scored.iter().map(|s| s.f1.sketch_avg).sum::<f64>() / n as f64;
    let f1_extrusion = scored.iter().map(|s| s.f1.extrusion.f1).sum::<f64>() / n as f64;
    let ir = 100.0 * scored.iter().filter(|s| s.invalid).count() as f64 / n as f64;

    let paired: Vec<(&PointCloud, &PointCloud)> = scored
        .iter()
        .filter_map(|s| Some((s.generated.as_ref()?, s.reference.as_ref()?)))
        .collect();
    let distances: Vec<f64> = paired.par_iter().map(|(g, r)| chamfer(g, r)).collect::<Result<_, _>>()?;
    let cd = mean(distances.into_iter());

    let gen_set: Vec<PointCloud> = scored.iter().filter_map(|s| s.generated.clone()).collect();
    let ref_set: Vec<PointCloud> = scored.iter().filter_map(|s| s.reference.clone()).collect();
    let (cov, mmd, js) = if gen_set.is_empty() || ref_set.is_empty() {
        (None, None, None)
    } else {
        let m = chamfer_matrix(&gen_set, &ref_set)?;
        (
            Some(coverage_from_matrix(&m, ref_set.len())),
            Some(mmd_from_matrix(&m, ref_set.len())),
            Some(jsd(&gen_set, &ref_set, cfg.jsd_grid)?),
        )
    };
    Ok(EvalReport {
        schema_version: SCHEMA_VERSION,
        f1_sketch,
        f1_extrusion,
        cd_x1000: cd.map(|v| v * 1000.0),
        cov,
        mmd_x1000: mmd.map(|v| v * 1000.0),
        jsd: js,
        ir,
        n,
        cd,
        mmd,
        n_rendered: gen_set.len(),
    })
}
