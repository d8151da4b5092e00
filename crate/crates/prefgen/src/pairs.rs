use render::is_renderable;
use serde::{Deserialize, Serialize};
use sem_core::parse_sequence;

use crate::oracle::ScoredCandidate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub prompt: String,
    pub chosen: String,
    pub rejected: String,
    pub score_w: f64,
    pub score_l: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairConfig {
    /// Minimum score gap between chosen and rejected.
    pub margin: f64,
    /// Minimum score of a chosen candidate.
    pub floor: f64,
    /// Pairs taken per prompt, walking inwards from the extremes of the
    /// ranking: best with worst, second best with second worst, and so on.
    pub pairs_per_prompt: usize,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self { margin: 2.0, floor: 5.0, pairs_per_prompt: 2 }
    }
}

/// Pairs for one prompt. Only candidates that parse take part; chosen
/// candidates must also render. Ranking is by score, ties broken by text.
pub fn pairs_for_prompt(prompt: &str, scored: &[ScoredCandidate], cfg: &PairConfig) -> Vec<PreferencePair> {
    let mut ranked: Vec<&ScoredCandidate> = scored.iter().filter(|c| c.parsed).collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.sequence.cmp(&b.sequence)));
    let mut out = Vec::new();
    let n = ranked.len();
    for i in 0..cfg.pairs_per_prompt {
        if n < 2 || i >= n - 1 - i {
            break;
        }
        let (w, l) = (ranked[i], ranked[n - 1 - i]);
        if !w.valid || w.score < cfg.floor || w.score - l.score < cfg.margin || w.sequence == l.sequence {
            break;
        }
        out.push(PreferencePair {
            prompt: prompt.to_string(),
            chosen: w.sequence.clone(),
            rejected: l.sequence.clone(),
            score_w: w.score,
            score_l: l.score,
        });
    }
    out
}

pub fn build_pairs(groups: &[(String, Vec<ScoredCandidate>)], cfg: &PairConfig) -> Vec<PreferencePair> {
    groups.iter().flat_map(|(prompt, scored)| pairs_for_prompt(prompt, scored, cfg)).collect()
}

/// Checks the margin and validity invariants of an emitted pair.
pub fn check_pair(pair: &PreferencePair, margin: f64) -> Result<(), String> {
    if pair.score_w - pair.score_l < margin {
        return Err(format!("score gap {} below margin {margin}", pair.score_w - pair.score_l));
    }
    if pair.chosen == pair.rejected {
        return Err("chosen and rejected are identical".into());
    }
    let chosen = parse_sequence(&pair.chosen).map_err(|e| format!("chosen does not parse: {e}"))?;
    if !is_renderable(&chosen).is_valid {
        return Err("chosen does not render".into());
    }
    parse_sequence(&pair.rejected).map_err(|e| format!("rejected does not parse: {e}"))?;
    Ok(())
}
