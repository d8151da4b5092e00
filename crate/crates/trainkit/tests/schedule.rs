use prefgen::{OracleConfig, OracleScorer, SamplingConfig};
use proptest::prelude::*;
use trainkit::checkpoint::{self, checkpoint_name};
use trainkit::{synth, ModelShape, Phase, TrainConfig, Trainer};

fn tiny(rounds: usize) -> TrainConfig {
    TrainConfig {
        initial_sl_epochs: 1,
        rounds,
        vf_epochs: 1,
        sl_epochs_per_round: 1,
        learning_rate: 3e-3,
        batch_size: 8,
        sl_examples: 16,
        vf_prompts: 3,
        probe_prompts: 3,
        margin_pairs: 3,
        collapse_ir: 100.0,
        model: ModelShape { d_model: 16, layers: 1, heads: 2, d_ff: 32, context: 160 },
        sampling: SamplingConfig { k: 2, max_tokens: 40, ..SamplingConfig::default() },
        oracle: OracleConfig { resolution: 16, points: 64, ..OracleConfig::default() },
        ..TrainConfig::default()
    }
}

fn scorer() -> OracleScorer {
    OracleScorer { cfg: OracleConfig { resolution: 16, points: 64, ..OracleConfig::default() } }
}

#[test]
fn zero_rounds_is_plain_supervised_training() {
    let train = synth::dataset(16, 1);
    let held = synth::dataset(3, 2);
    let s = scorer();
    let mut t = Trainer::new(tiny(0), &train, &held, &s).unwrap();
    t.run().unwrap();
    assert_eq!(t.phases(), &[Phase::Sl]);
    let names: Vec<&str> = t.checkpoints().iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["f_SL_0"]);
    assert!(t.pair_stats().is_empty());
}

#[test]
fn alternation_order_and_determinism() {
    let train = synth::dataset(16, 1);
    let held = synth::dataset(3, 2);
    let s = scorer();
    let run = || {
        let mut t = Trainer::new(tiny(2), &train, &held, &s).unwrap();
        t.run().unwrap();
        t
    };
    let a = run();
    use Phase::*;
    assert_eq!(a.phases(), &[Sl, Snapshot, Vf, Sl, Snapshot, Vf, Sl]);
    let names: Vec<&str> = a.checkpoints().iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["f_SL_0", "f_VF_1", "f_SL_1", "f_VF_2", "f_SL_2"]);
    assert_eq!(a.pair_stats().len(), 2);
    let snaps: Vec<_> = a.log().iter().filter(|r| r.phase == Snapshot).collect();
    assert_eq!(snaps.len(), 2);
    assert!(snaps.iter().all(|r| r.pairs_sha256.as_ref().is_some_and(|h| h.len() == 64)));

    let b = run();
    assert_eq!(a.policy().params(), b.policy().params());
    assert_eq!(a.log(), b.log());
}

#[test]
fn checkpoints_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let train = synth::dataset(16, 1);
    let held = synth::dataset(3, 2);
    let s = scorer();
    let mut t = Trainer::new(tiny(0), &train, &held, &s).unwrap().with_output(dir.path().into());
    t.run().unwrap();
    let (model, sidecar) = checkpoint::load(dir.path(), &checkpoint_name(Phase::Sl, 0)).unwrap();
    assert_eq!(model.params(), t.policy().params());
    assert_eq!(sidecar.round, 0);
    assert_eq!(sidecar.sha256, t.checkpoints()[0].params_sha256);
}

proptest! {
    #[test]
    fn blob_round_trip(params in prop::collection::vec(-1e6f64..1e6, 0..200)) {
        prop_assert_eq!(checkpoint::decode(&checkpoint::encode(&params)).unwrap(), params);
    }

    #[test]
    fn truncated_blob_is_rejected(params in prop::collection::vec(-1.0f64..1.0, 1..50), cut in 1usize..8) {
        let blob = checkpoint::encode(&params);
        prop_assert!(checkpoint::decode(&blob[..blob.len() - cut]).is_err());
    }
}
