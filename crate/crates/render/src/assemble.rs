use sem_core::sequence::check_invariants;
use sem_core::{validate, BooleanOp, CadModel, Issue, ValidationReport};

use crate::error::RenderError;
use crate::extrude::extrude;
use crate::raster::rasterize_indexed;
use crate::voxel::VoxelSolid;
use crate::SKETCH_RESOLUTION;

/// Voxel resolution of the quick renderability check.
pub const PROBE_RESOLUTION: usize = 16;

/// Folds all pairs in design order, starting from an empty solid. The first
/// operation has to be `add`.
pub fn assemble(model: &CadModel, resolution: usize) -> Result<VoxelSolid, RenderError> {
    if let Some(first) = model.pairs.first() {
        if first.extrusion.op != BooleanOp::Add {
            return Err(RenderError::FirstOpNotAdd(first.extrusion.op.word()));
        }
    }
    let mut acc = VoxelSolid::empty(resolution)?;
    for (i, pair) in model.pairs.iter().enumerate() {
        let region = rasterize_indexed(&pair.sketch, SKETCH_RESOLUTION, i)?;
        let body = extrude(&region, &pair.extrusion, resolution)?;
        acc = match pair.extrusion.op {
            BooleanOp::Add => acc.union(&body)?,
            BooleanOp::Cut => acc.difference(&body)?,
            BooleanOp::Intersect => acc.intersection(&body)?,
        };
    }
    Ok(acc)
}

/// Validates and assembles at the given resolution. The report is valid only
/// when both steps succeed and the solid is non-empty; the solid is returned
/// whenever assembly itself succeeded.
pub fn render_report(model: &CadModel, resolution: usize) -> (ValidationReport, Option<VoxelSolid>) {
    let mut report = validate(model);
    if check_invariants(model).is_err() {
        return (report, None);
    }
    match assemble(model, resolution) {
        Ok(solid) => {
            if solid.is_empty() {
                report.push(Issue::error(RenderError::EmptySolid.code(), "render", "assembled solid has no voxels"));
            }
            (report, Some(solid))
        }
        Err(e) => {
            if !report.has_code(e.code()) {
                report.push(Issue::error(e.code(), "render", e.to_string()));
            }
            (report, None)
        }
    }
}

/// Whether a model renders to a non-empty solid at [`PROBE_RESOLUTION`].
pub fn is_renderable(model: &CadModel) -> ValidationReport {
    render_report(model, PROBE_RESOLUTION).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use sem_core::model::build::{rect, sketch_of};
    use sem_core::{Extrusion, SketchExtrude};

    fn pair(x0: u8, y0: u8, x1: u8, y1: u8, op: BooleanOp) -> SketchExtrude {
        SketchExtrude { sketch: sketch_of(rect(x0, y0, x1, y1)), extrusion: Extrusion::straight(op, 16, 48) }
    }

    #[test]
    fn add_then_cut_same_is_empty() {
        let m = CadModel::new(vec![pair(8, 8, 40, 40, BooleanOp::Add), pair(8, 8, 40, 40, BooleanOp::Cut)]);
        assert!(assemble(&m, 32).unwrap().is_empty());
        let r = is_renderable(&m);
        assert!(!r.is_valid);
        assert!(r.has_code("EMPTY_SOLID"));
    }

    #[test]
    fn first_cut_rejected() {
        let m = CadModel::new(vec![pair(8, 8, 40, 40, BooleanOp::Cut)]);
        assert_eq!(assemble(&m, 16), Err(RenderError::FirstOpNotAdd("cut")));
        assert!(is_renderable(&m).has_code("FIRST_OP_NOT_ADD"));
    }

    #[test]
    fn disjoint_adds_sum() {
        let a = CadModel::new(vec![pair(4, 4, 24, 24, BooleanOp::Add)]);
        let b = CadModel::new(vec![pair(36, 36, 60, 60, BooleanOp::Add)]);
        let ab = CadModel::new(vec![pair(4, 4, 24, 24, BooleanOp::Add), pair(36, 36, 60, 60, BooleanOp::Add)]);
        let sum = assemble(&a, 64).unwrap().count() + assemble(&b, 64).unwrap().count();
        let both = assemble(&ab, 64).unwrap().count();
        assert!((both as f64 - sum as f64).abs() / sum as f64 <= 0.01);
    }

    #[test]
    fn intersect_is_bounded() {
        let a = pair(8, 8, 40, 40, BooleanOp::Add);
        let b = pair(24, 8, 56, 40, BooleanOp::Intersect);
        let va = assemble(&CadModel::new(vec![a.clone()]), 32).unwrap().count();
        let mut b_add = b.clone();
        b_add.extrusion.op = BooleanOp::Add;
        let vb = assemble(&CadModel::new(vec![b_add]), 32).unwrap().count();
        let vi = assemble(&CadModel::new(vec![a, b]), 32).unwrap().count();
        assert!(vi <= va.min(vb));
        assert!(vi > 0);
    }

    #[test]
    fn square_prism_renders() {
        let m = CadModel::new(vec![pair(8, 8, 56, 56, BooleanOp::Add)]);
        let r = is_renderable(&m);
        assert!(r.is_valid, "{r}");
    }
}
