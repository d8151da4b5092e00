use std::collections::HashMap;

use prefgen::lvm::{HttpReply, Transport};
use prefgen::{
    check_pair, generate_pairs, LvmClient, LvmConfig, LvmScorer, OracleConfig, OracleScorer, PairConfig, Policy,
    PrefError, PreferencePair, PromptItem, SamplingConfig, Template,
};
use sem_core::dataset::{read_jsonl, write_jsonl};
use sem_core::model::build::{rect, sketch_of};
use sem_core::{serialize, BooleanOp, CadModel, Extrusion};

/// Uniform choice among a fixed set of token strings, decoded word by word
/// along a prefix trie.
struct TriePolicy {
    words: Vec<String>,
    texts: Vec<Vec<usize>>,
}

const EOS: usize = 0;

impl TriePolicy {
    fn new(texts: &[String]) -> Self {
        let mut words = vec!["<eos>".to_string()];
        let mut ids = HashMap::new();
        let texts = texts
            .iter()
            .map(|t| {
                t.split_whitespace()
                    .map(|w| {
                        *ids.entry(w.to_string()).or_insert_with(|| {
                            words.push(w.to_string());
                            words.len() - 1
                        })
                    })
                    .chain([EOS])
                    .collect()
            })
            .collect();
        Self { words, texts }
    }

    fn logits(&self, prefix: &[usize]) -> Vec<f64> {
        let mut l = vec![-1e9; self.words.len()];
        for t in &self.texts {
            if t.starts_with(prefix) && t.len() > prefix.len() {
                l[t[prefix.len()]] = 0.0;
            }
        }
        l
    }
}

impl Policy for TriePolicy {
    type Session = Vec<usize>;

    fn start(&self, prompt: &str) -> Result<(Vec<usize>, Vec<f64>), PrefError> {
        if prompt.is_empty() {
            return Err(PrefError::Prompt("empty".into()));
        }
        Ok((Vec::new(), self.logits(&[])))
    }

    fn advance(&self, s: &mut Vec<usize>, token: usize) -> Option<Vec<f64>> {
        s.push(token);
        Some(self.logits(s))
    }

    fn token_text(&self, token: usize) -> &str {
        &self.words[token]
    }

    fn eos(&self) -> usize {
        EOS
    }
}

fn plate(half: u8, top: u8) -> String {
    let m = CadModel::single(sketch_of(rect(32 - half, 32 - half, 32 + half, 32 + half)), Extrusion::straight(BooleanOp::Add, 32, top));
    serialize(&m).unwrap()
}

fn fixture() -> (TriePolicy, Vec<PromptItem>) {
    let texts = vec![plate(20, 40), plate(12, 40), plate(20, 36), plate(6, 60), "line 8 8 <curve_end>".to_string()];
    let items = (0..12).map(|i| PromptItem { text: format!("plate {i}"), reference: Some(plate(20, 40)) }).collect();
    (TriePolicy::new(&texts), items)
}

fn sampling() -> SamplingConfig {
    SamplingConfig { temperature: 1.0, top_p: 1.0, ..SamplingConfig::default() }
}

#[test]
fn oracle_pipeline_pairs_satisfy_invariants() {
    let (policy, items) = fixture();
    let scorer = OracleScorer { cfg: OracleConfig::default() };
    let out = generate_pairs(&policy, &items, &sampling(), &scorer, &PairConfig::default()).unwrap();
    assert_eq!(out.stats.candidates, 60);
    assert!(out.stats.pairs > 0);
    for p in &out.pairs {
        check_pair(p, 2.0).unwrap();
    }
    let again = generate_pairs(&policy, &items, &sampling(), &scorer, &PairConfig::default()).unwrap();
    assert_eq!(out.pairs, again.pairs);

    let mut buf = Vec::new();
    write_jsonl(&mut buf, &out.pairs).unwrap();
    let line = String::from_utf8(buf.clone()).unwrap();
    assert!(line.starts_with("{\"prompt\":"));
    let back: Vec<PreferencePair> = read_jsonl(buf.as_slice()).unwrap();
    assert_eq!(back, out.pairs);
}

#[test]
fn missing_reference_is_reported() {
    let (policy, mut items) = fixture();
    items[3].reference = None;
    let scorer = OracleScorer { cfg: OracleConfig::default() };
    let err = generate_pairs(&policy, &items, &sampling(), &scorer, &PairConfig::default()).unwrap_err();
    assert!(matches!(err, PrefError::BadReference { index: 3, .. }));
}

struct Down;

impl Transport for Down {
    fn post_json(&self, _: &str, _: &str, _: &serde_json::Value) -> Result<HttpReply, String> {
        Err("connection refused".into())
    }
}

struct Fixed;

impl Transport for Fixed {
    fn post_json(&self, _: &str, _: &str, body: &serde_json::Value) -> Result<HttpReply, String> {
        let text = body["messages"][0]["content"][0]["text"].as_str().unwrap();
        assert!(text.contains("harsh grader") && text.contains("plate"));
        let reply = serde_json::json!({"choices": [{"message": {"content": "Decent.\nScore: 8/10"}}]});
        Ok(HttpReply { status: 200, body: reply.to_string() })
    }
}

fn lvm_scorer<T: Transport>(t: T, fallback: Option<OracleConfig>) -> LvmScorer<T> {
    let client = LvmClient::new(LvmConfig { base_delay_ms: 0, ..LvmConfig::default() }, "key".into(), t)
        .with_sleeper(Box::new(|_| {}));
    LvmScorer { client, template: Template::grading(), resolution: 32, fallback }
}

#[test]
fn lvm_scorer_uses_model_scores() {
    let (policy, items) = fixture();
    let out = generate_pairs(&policy, &items[..2], &sampling(), &lvm_scorer(Fixed, None), &PairConfig::default()).unwrap();
    for g in &out.groups {
        for s in &g.scored {
            assert_eq!(s.score, if s.valid { 8.0 } else { 0.0 });
        }
    }
}

#[test]
fn lvm_failure_surfaces_or_falls_back() {
    let (policy, items) = fixture();
    let err = generate_pairs(&policy, &items[..2], &sampling(), &lvm_scorer(Down, None), &PairConfig::default()).unwrap_err();
    assert!(matches!(err, PrefError::Lvm(prefgen::LvmError::TransportError(_))));
    let oracle = generate_pairs(&policy, &items[..2], &sampling(), &OracleScorer { cfg: OracleConfig::default() }, &PairConfig::default()).unwrap();
    let fallback =
        generate_pairs(&policy, &items[..2], &sampling(), &lvm_scorer(Down, Some(OracleConfig::default())), &PairConfig::default()).unwrap();
    assert_eq!(oracle.pairs, fallback.pairs);
}
