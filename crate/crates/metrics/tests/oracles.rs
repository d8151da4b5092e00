use metrics::chamfer::dist_sq;
use metrics::{chamfer, coverage, f1_primitives, invalidity_ratio, jsd, mmd};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use render::PointCloud;
use sem_core::random::random_model;

fn brute_chamfer(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let one = |x: &[[f64; 3]], y: &[[f64; 3]]| {
        x.iter().map(|&p| y.iter().map(|&q| dist_sq(p, q)).fold(f64::INFINITY, f64::min)).sum::<f64>()
            / x.len() as f64
    };
    one(a, b) + one(b, a)
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
    PointCloud::new((0..n).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect())
}

#[test]
fn kd_tree_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let a = random_cloud(&mut rng, 256);
        let b = random_cloud(&mut rng, 256);
        let fast = chamfer(&a, &b).unwrap();
        assert!((fast - brute_chamfer(&a.points, &b.points)).abs() <= 1e-9);
    }
}

#[test]
fn golden_fixtures_have_no_invalid() {
    let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/golden");
    let seqs: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "sem"))
        .map(|p| std::fs::read_to_string(p).unwrap())
        .collect();
    assert_eq!(seqs.len(), 10);
    assert_eq!(invalidity_ratio(&seqs), 0.0);
}

fn cloud_strategy() -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 1..40).prop_map(PointCloud::new)
}

proptest! {
    #[test]
    fn chamfer_symmetric_and_rigid_invariant(a in cloud_strategy(), b in cloud_strategy(), angle in 0.0f64..6.3, shift in prop::array::uniform3(-2.0f64..2.0)) {
        let ab = chamfer(&a, &b).unwrap();
        prop_assert!((ab - chamfer(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
        let (s, c) = angle.sin_cos();
        let move_it = |pc: &PointCloud| PointCloud::new(pc.points.iter().map(|p| [c * p[0] - s * p[1] + shift[0], s * p[0] + c * p[1] + shift[1], p[2] + shift[2]]).collect());
        prop_assert!((chamfer(&move_it(&a), &move_it(&b)).unwrap() - ab).abs() <= 1e-9);
    }

    #[test]
    fn set_identities(set in prop::collection::vec(cloud_strategy(), 1..6), extra in cloud_strategy()) {
        prop_assert_eq!(mmd(&set, &set).unwrap(), 0.0);
        prop_assert_eq!(jsd(&set, &set, 28).unwrap(), 0.0);
        let ab = jsd(&set, std::slice::from_ref(&extra), 28).unwrap();
        let ba = jsd(std::slice::from_ref(&extra), &set, 28).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        let mut bigger = set.clone();
        bigger.push(extra);
        prop_assert!(mmd(&bigger, &set).unwrap() <= mmd(&set[..1], &set).unwrap() + 1e-15);
    }

    #[test]
    fn coverage_of_self_is_full(set in prop::collection::vec(cloud_strategy(), 1..6)) {
        // distinct clouds needed so each reference is its own unique argmin
        let distinct: Vec<PointCloud> = set.iter().enumerate().map(|(i, c)| PointCloud::new(c.points.iter().map(|p| [p[0] + 10.0 * i as f64, p[1], p[2]]).collect())).collect();
        prop_assert_eq!(coverage(&distinct, &distinct).unwrap(), 100.0);
    }

    #[test]
    fn f1_bounded_and_exact_on_identity(seed in any::<u64>(), other in any::<u64>()) {
        let a = random_model(&mut ChaCha8Rng::seed_from_u64(seed));
        let b = random_model(&mut ChaCha8Rng::seed_from_u64(other));
        let f = f1_primitives(&a, &b);
        for p in [f.line, f.arc, f.circle, f.extrusion] {
            prop_assert!((0.0..=1.0).contains(&p.f1) && (0.0..=1.0).contains(&p.precision) && (0.0..=1.0).contains(&p.recall));
        }
        let same = f1_primitives(&a, &a);
        prop_assert_eq!(same.sketch_avg, 1.0);
        prop_assert_eq!(same.extrusion.f1, 1.0);
    }
}
