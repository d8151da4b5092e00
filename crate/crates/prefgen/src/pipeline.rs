use rayon::prelude::*;
use render::{assemble, export::silhouette_pixels, is_renderable};
use serde::{Deserialize, Serialize};
use sem_core::parse_sequence;

use crate::error::PrefError;
use crate::lvm::{encode_png, LvmClient, Transport};
use crate::oracle::{score_against, OracleConfig, Rendered, ScoredCandidate};
use crate::pairs::{pairs_for_prompt, PairConfig, PreferencePair};
use crate::prompts::Template;
use crate::sampling::{sample_candidates, Candidate, Policy, SamplingConfig};

/// A prompt and, when known, its ground-truth sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptItem {
    pub text: String,
    pub reference: Option<String>,
}

pub trait Scorer: Sync {
    fn score_group(&self, index: usize, item: &PromptItem, candidates: &[Candidate]) -> Result<Vec<ScoredCandidate>, PrefError>;
}

fn overflowed(c: &Candidate) -> ScoredCandidate {
    ScoredCandidate::invalid(&c.sequence, parse_sequence(&c.sequence).is_ok())
}

fn reference_of(index: usize, item: &PromptItem, cfg: &OracleConfig) -> Result<Rendered, PrefError> {
    let bad = |reason: String| PrefError::BadReference { index, reason };
    let text = item.reference.as_deref().ok_or_else(|| bad("no reference sequence".into()))?;
    let model = parse_sequence(text).map_err(|e| bad(e.to_string()))?;
    Rendered::new(&model, cfg).ok_or_else(|| bad("reference does not render".into()))
}

/// Scores by geometric comparison with the prompt's reference.
pub struct OracleScorer {
    pub cfg: OracleConfig,
}

impl Scorer for OracleScorer {
    fn score_group(&self, index: usize, item: &PromptItem, candidates: &[Candidate]) -> Result<Vec<ScoredCandidate>, PrefError> {
        let reference = reference_of(index, item, &self.cfg)?;
        Ok(candidates
            .iter()
            .map(|c| if c.overflow { overflowed(c) } else { score_against(&c.sequence, &reference, &self.cfg) })
            .collect())
    }
}

/// Scores by sending a silhouette snapshot to a vision model, optionally
/// falling back to the oracle when a request fails.
pub struct LvmScorer<T: Transport> {
    pub client: LvmClient<T>,
    pub template: Template,
    pub resolution: usize,
    pub fallback: Option<OracleConfig>,
}

impl<T: Transport> LvmScorer<T> {
    fn score_one(&self, item: &PromptItem, c: &Candidate) -> Result<ScoredCandidate, crate::error::LvmError> {
        let Ok(model) = parse_sequence(&c.sequence) else { return Ok(ScoredCandidate::invalid(&c.sequence, false)) };
        if c.overflow || !is_renderable(&model).is_valid {
            return Ok(ScoredCandidate::invalid(&c.sequence, true));
        }
        let Ok(solid) = assemble(&model, self.resolution) else { return Ok(ScoredCandidate::invalid(&c.sequence, true)) };
        let (w, h, pixels) = silhouette_pixels(&solid);
        let score = self.client.score(&self.template.fill(&item.text), &encode_png(w, h, &pixels))?;
        Ok(ScoredCandidate { sequence: c.sequence.clone(), score, valid: true, parsed: true, sub_scores: None })
    }
}

impl<T: Transport> Scorer for LvmScorer<T> {
    fn score_group(&self, index: usize, item: &PromptItem, candidates: &[Candidate]) -> Result<Vec<ScoredCandidate>, PrefError> {
        let mut reference = None;
        let mut out = Vec::with_capacity(candidates.len());
        for c in candidates {
            match (self.score_one(item, c), &self.fallback) {
                (Ok(s), _) => out.push(s),
                (Err(_), Some(cfg)) => {
                    if reference.is_none() {
                        reference = Some(reference_of(index, item, cfg)?);
                    }
                    out.push(score_against(&c.sequence, reference.as_ref().unwrap(), cfg));
                }
                (Err(e), None) => return Err(e.into()),
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub prompts: usize,
    pub candidates: usize,
    pub invalid_candidates: usize,
    pub overflowed: usize,
    /// Prompts whose candidates include at least two distinct sequences.
    pub prompts_with_distinct: usize,
    pub prompts_with_pairs: usize,
    pub pairs: usize,
}

#[derive(Clone, Debug)]
pub struct PromptGroup {
    pub prompt: String,
    pub scored: Vec<ScoredCandidate>,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub pairs: Vec<PreferencePair>,
    pub groups: Vec<PromptGroup>,
    pub stats: PipelineStats,
}

/// Samples, scores and pairs candidates for every prompt. Work is spread
/// over the rayon pool; output order follows the input.
pub fn generate_pairs<P, S>(
    policy: &P,
    items: &[PromptItem],
    sampling: &SamplingConfig,
    scorer: &S,
    pairing: &PairConfig,
) -> Result<PipelineOutput, PrefError>
where
    P: Policy + Sync,
    S: Scorer,
{
    sampling.check()?;
    let groups: Vec<(Vec<Candidate>, Vec<ScoredCandidate>)> = items
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let candidates = sample_candidates(policy, &item.text, i as u64, sampling)?;
            let scored = scorer.score_group(i, item, &candidates)?;
            Ok((candidates, scored))
        })
        .collect::<Result<_, PrefError>>()?;

    let mut stats = PipelineStats { prompts: items.len(), ..PipelineStats::default() };
    let mut pairs = Vec::new();
    let mut out_groups = Vec::with_capacity(items.len());
    for (item, (candidates, scored)) in items.iter().zip(groups) {
        stats.candidates += candidates.len();
        stats.overflowed += candidates.iter().filter(|c| c.overflow).count();
        stats.invalid_candidates += scored.iter().filter(|s| !s.valid).count();
        if candidates.iter().any(|c| c.sequence != candidates[0].sequence) {
            stats.prompts_with_distinct += 1;
        }
        let found = pairs_for_prompt(&item.text, &scored, pairing);
        if !found.is_empty() {
            stats.prompts_with_pairs += 1;
        }
        pairs.extend(found);
        out_groups.push(PromptGroup { prompt: item.text.clone(), scored });
    }
    stats.pairs = pairs.len();
    Ok(PipelineOutput { pairs, groups: out_groups, stats })
}
