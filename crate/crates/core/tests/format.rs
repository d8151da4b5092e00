use std::fs;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sem_core::random::random_model;
use sem_core::{canonicalize, parse_sequence, serialize, validate, CadModel, DecodeConfig, SemError};

fn fixtures(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(sub)
}

fn golden() -> Vec<(String, String, CadModel)> {
    let mut out = Vec::new();
    let mut entries: Vec<_> = fs::read_dir(fixtures("golden")).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.extension().is_some_and(|e| e == "sem") {
            let text = fs::read_to_string(&path).unwrap();
            let json = fs::read_to_string(path.with_extension("json")).unwrap();
            let expected: CadModel = serde_json::from_str(&json).unwrap();
            out.push((path.file_stem().unwrap().to_string_lossy().into_owned(), text, expected));
        }
    }
    out
}

#[test]
fn golden_fixtures_parse_to_expected_structure() {
    let corpus = golden();
    assert_eq!(corpus.len(), 10);
    for (name, text, expected) in corpus {
        let parsed = parse_sequence(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parsed, expected, "{name}");
        assert_eq!(serialize(&parsed).unwrap(), canonicalize(&text), "{name}");
        assert!(validate(&parsed).is_valid, "{name}: {}", validate(&parsed));
    }
}

#[test]
fn thousand_random_models_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let m = random_model(&mut rng);
        let text = serialize(&m).unwrap();
        assert_eq!(parse_sequence(&text).unwrap(), m);
        assert_eq!(serialize(&m).unwrap(), text);
    }
}

#[derive(serde::Deserialize)]
struct DecodeFixture {
    name: String,
    se_cmd: Vec<i64>,
    se_xy: Vec<[i64; 2]>,
    se_ext: Vec<i64>,
    expected: Option<String>,
    error: Option<String>,
}

#[test]
fn decode_fixtures() {
    let text = fs::read_to_string(fixtures("decode/fixtures.json")).unwrap();
    let cases: Vec<DecodeFixture> = serde_json::from_str(&text).unwrap();
    let mut seen_commands = std::collections::BTreeSet::new();
    for case in &cases {
        let result = sem_core::decode_command_arrays(&case.se_cmd, &case.se_xy, &case.se_ext, DecodeConfig::default());
        match (&case.expected, &case.error) {
            (Some(expected), None) => {
                let model = result.unwrap_or_else(|e| panic!("{}: {e}", case.name));
                assert_eq!(&serialize(&model).unwrap(), expected, "{}", case.name);
                seen_commands.extend(case.se_cmd.iter().copied());
            }
            (None, Some(code)) => {
                let err = result.expect_err(&case.name);
                assert_eq!(err.code(), code, "{}: {err}", case.name);
            }
            _ => panic!("{}: fixture needs exactly one of expected/error", case.name),
        }
    }
    assert_eq!(seen_commands.into_iter().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5]);
}

#[test]
fn deleting_a_token_breaks_the_record() {
    for (name, text, _) in golden() {
        let words: Vec<&str> = text.split_whitespace().collect();
        let shorter = words[..words.len() - 1].join(" ");
        assert!(
            matches!(parse_sequence(&shorter), Err(SemError::BadExtrusionRecord { found: 17, .. })),
            "{name}"
        );
    }
}

fn arb_model() -> impl Strategy<Value = CadModel> {
    any::<u64>().prop_map(|seed| random_model(&mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #[test]
    fn serialization_is_a_fixed_point(m in arb_model()) {
        let once = serialize(&m).unwrap();
        let twice = serialize(&parse_sequence(&once).unwrap()).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn parser_never_panics(words in prop::collection::vec(
        prop::sample::select(vec!["line", "arc", "circle", "<curve_end>", "<loop_end>", "<face_end>",
            "<sketch_end>", "add", "cut", "1", "32", "63", "64"]), 0..60)) {
        let text = words.join(" ");
        if let Ok(m) = parse_sequence(&text) {
            let s = serialize(&m).unwrap();
            prop_assert_eq!(serialize(&parse_sequence(&s).unwrap()).unwrap(), s);
        }
    }

    #[test]
    fn validity_iff_no_errors(m in arb_model()) {
        let r = validate(&m);
        prop_assert_eq!(r.is_valid, r.errors().next().is_none());
    }
}
