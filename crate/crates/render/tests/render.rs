use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use render::{assemble, extrude, is_renderable, rasterize_sketch, sample_surface, VoxelSolid};
use sem_core::model::build::{polygon, rect, sketch_of};
use sem_core::{parse_sequence, BooleanOp, CadModel, Extrusion, SketchExtrude};

fn golden() -> Vec<(String, CadModel)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/golden");
    let mut out: Vec<(String, CadModel)> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "sem"))
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p.file_stem().unwrap().to_string_lossy().into_owned(), parse_sequence(&text).unwrap())
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn fixture(name: &str) -> CadModel {
    golden().into_iter().find(|(n, _)| n == name).unwrap().1
}

#[test]
fn prism_volume_matches_area_times_height() {
    // square 8..56 on the grid spans 1.5 world units; extents 24..40 span 0.5
    let region = rasterize_sketch(&sketch_of(rect(8, 8, 56, 56)), 128).unwrap();
    let solid = extrude(&region, &Extrusion::straight(BooleanOp::Add, 24, 40), 64).unwrap();
    let expected = 1.5 * 1.5 * 0.5;
    assert!((solid.volume() - expected).abs() / expected <= 0.05, "{}", solid.volume());
}

#[test]
fn triangle_prism_volume() {
    let region = rasterize_sketch(&sketch_of(polygon(&[(4, 4), (60, 4), (4, 60)])), 128).unwrap();
    let solid = extrude(&region, &Extrusion::straight(BooleanOp::Add, 8, 56), 64).unwrap();
    let side = 56.0 / 32.0;
    let expected = 0.5 * side * side * 1.5;
    assert!((solid.volume() - expected).abs() / expected <= 0.05, "{}", solid.volume());
}

#[test]
fn zero_height_is_empty() {
    let region = rasterize_sketch(&sketch_of(rect(8, 8, 56, 56)), 128).unwrap();
    let solid = extrude(&region, &Extrusion::straight(BooleanOp::Add, 30, 30), 64).unwrap();
    assert!(solid.is_empty());
}

#[test]
fn quarter_turn_of_l_profile() {
    let l = sketch_of(polygon(&[(8, 8), (56, 8), (56, 24), (24, 24), (24, 56), (8, 56)]));
    let region = rasterize_sketch(&l, 128).unwrap();
    let plain = Extrusion::straight(BooleanOp::Add, 20, 44);
    let mut turned = plain;
    // rows (0,-1,0), (1,0,0), (0,0,1)
    turned.rotation = [32, 1, 32, 63, 32, 32, 32, 32, 63];
    let a = extrude(&region, &plain, 64).unwrap().rotate_quarter_z();
    let b = extrude(&region, &turned, 64).unwrap();
    assert!(!a.is_empty());
    assert!(a.is_subset_of(&b.dilate()));
    assert!(b.is_subset_of(&a.dilate()));
}

#[test]
fn curve_order_does_not_change_solid() {
    let a = assemble(&fixture("square_prism"), 64).unwrap();
    let b = assemble(&fixture("square_prism_rotated_start"), 64).unwrap();
    assert!(a.iou(&b).unwrap() >= 0.98);
}

#[test]
fn resolution_monotonicity_on_fixtures() {
    for (name, model) in golden() {
        let coarse = assemble(&model, 32).unwrap().fraction();
        let fine = assemble(&model, 64).unwrap().fraction();
        assert!((coarse - fine).abs() < 0.05, "{name}: {coarse} vs {fine}");
    }
}

#[test]
fn fixtures_are_renderable_and_deterministic() {
    for (name, model) in golden() {
        let r = is_renderable(&model);
        assert!(r.is_valid, "{name}: {r}");
        assert_eq!(r, is_renderable(&model));
    }
}

#[test]
fn renderability_failures() {
    let cut_only = CadModel::single(sketch_of(rect(8, 8, 56, 56)), Extrusion::straight(BooleanOp::Cut, 16, 48));
    let r = is_renderable(&cut_only);
    assert!(!r.is_valid && r.has_code("FIRST_OP_NOT_ADD"));
    let flat = CadModel::single(sketch_of(rect(8, 8, 56, 56)), Extrusion::straight(BooleanOp::Add, 32, 32));
    let r = is_renderable(&flat);
    assert!(!r.is_valid && r.has_code("EMPTY_SOLID"));
}

#[test]
fn cube_samples_lie_near_surface() {
    let model = CadModel::single(sketch_of(rect(8, 8, 56, 56)), Extrusion::straight(BooleanOp::Add, 8, 56));
    let solid = assemble(&model, 64).unwrap();
    let cloud = sample_surface(&solid, 2048, 11).unwrap();
    assert_eq!(cloud.len(), 2048);
    let half = 0.75;
    let voxel = solid.voxel_size();
    for p in &cloud.points {
        let outside = p.iter().map(|v| (v.abs() - half).max(0.0).powi(2)).sum::<f64>().sqrt();
        let inside = p.iter().map(|v| half - v.abs()).fold(f64::INFINITY, f64::min).max(0.0);
        assert!(outside.max(inside) <= voxel + 1e-12, "{p:?}");
    }
}

fn block(lo: [u8; 2], hi: [u8; 2], ext: (u8, u8), op: BooleanOp) -> SketchExtrude {
    SketchExtrude {
        sketch: sketch_of(rect(lo[0], lo[1], hi[0], hi[1])),
        extrusion: Extrusion::straight(op, ext.0, ext.1),
    }
}

fn solid_of(b: &SketchExtrude) -> VoxelSolid {
    let mut b = b.clone();
    b.extrusion.op = BooleanOp::Add;
    assemble(&CadModel::new(vec![b]), 16).unwrap()
}

fn arb_block() -> impl Strategy<Value = SketchExtrude> {
    (0u8..50, 0u8..50, 4u8..14, 4u8..14, 0u8..50, 4u8..14).prop_map(|(x, y, w, h, z, d)| {
        block([x, y], [x + w, y + h], (z, z + d), BooleanOp::Add)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn boolean_laws(a in arb_block(), b in arb_block(), c in arb_block()) {
        let (sa, sb, sc) = (solid_of(&a), solid_of(&b), solid_of(&c));
        prop_assert_eq!(sa.union(&sb).unwrap(), sb.union(&sa).unwrap());
        prop_assert_eq!(sa.union(&sb).unwrap().union(&sc).unwrap(), sa.union(&sb.union(&sc).unwrap()).unwrap());
        prop_assert!(sa.difference(&sa).unwrap().is_empty());
        prop_assert_eq!(sa.intersection(&sa).unwrap(), sa.clone());
        prop_assert!(sa.union(&sb).unwrap().count() <= sa.count() + sb.count());
    }

    #[test]
    fn fold_matches_voxel_booleans(a in arb_block(), b in arb_block()) {
        let (sa, sb) = (solid_of(&a), solid_of(&b));
        for (op, expected) in [
            (BooleanOp::Add, sa.union(&sb).unwrap()),
            (BooleanOp::Cut, sa.difference(&sb).unwrap()),
            (BooleanOp::Intersect, sa.intersection(&sb).unwrap()),
        ] {
            let mut second = b.clone();
            second.extrusion.op = op;
            let folded = assemble(&CadModel::new(vec![a.clone(), second]), 16).unwrap();
            prop_assert_eq!(folded, expected);
        }
    }
}
