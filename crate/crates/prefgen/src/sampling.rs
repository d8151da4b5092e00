use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::PrefError;

/// An autoregressive model that can be decoded one token at a time.
pub trait Policy {
    /// Incremental decoding state, e.g. a key/value cache.
    type Session;

    /// Consumes the prompt and returns the session with next-token logits.
    fn start(&self, prompt: &str) -> Result<(Self::Session, Vec<f64>), PrefError>;

    /// Appends `token`; `None` once the context window is full.
    fn advance(&self, session: &mut Self::Session, token: usize) -> Option<Vec<f64>>;

    fn token_text(&self, token: usize) -> &str;

    fn eos(&self) -> usize;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub k: usize,
    pub temperature: f64,
    pub top_p: f64,
    pub top_k: usize,
    pub max_tokens: usize,
    pub seed: u64,
    /// Always take the most likely token.
    pub greedy: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { k: 5, temperature: 0.3, top_p: 0.9, top_k: 50, max_tokens: 1024, seed: 42, greedy: false }
    }
}

impl SamplingConfig {
    pub fn check(&self) -> Result<(), PrefError> {
        if self.k < 2 {
            return Err(PrefError::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if !(self.temperature > 0.0) {
            return Err(PrefError::Config(format!("temperature must be positive, got {}", self.temperature)));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(PrefError::Config(format!("top_p must be in (0, 1], got {}", self.top_p)));
        }
        if self.top_k == 0 || self.max_tokens == 0 {
            return Err(PrefError::Config("top_k and max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub sequence: String,
    /// Generation stopped at `max_tokens` or the context limit before the
    /// end token; such candidates are scored as invalid.
    pub overflow: bool,
}

fn argmax(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in logits.iter().enumerate() {
        if v > logits[best] {
            best = i;
        }
    }
    best
}

/// Draws one token after temperature scaling and top-k / nucleus truncation.
pub fn sample_token(logits: &[f64], cfg: &SamplingConfig, rng: &mut impl Rng) -> usize {
    if cfg.greedy {
        return argmax(logits);
    }
    let mut order: Vec<usize> = (0..logits.len()).collect();
    order.sort_by(|&a, &b| logits[b].total_cmp(&logits[a]).then(a.cmp(&b)));
    order.truncate(cfg.top_k.max(1));
    let top = logits[order[0]];
    let weights: Vec<f64> = order.iter().map(|&i| ((logits[i] - top) / cfg.temperature).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut kept = 0;
    let mut mass = 0.0;
    for w in &weights {
        mass += w / total;
        kept += 1;
        if mass >= cfg.top_p {
            break;
        }
    }
    let kept_total: f64 = weights[..kept].iter().sum();
    let mut u = rng.random::<f64>() * kept_total;
    for (w, &i) in weights[..kept].iter().zip(&order) {
        if u < *w {
            return i;
        }
        u -= w;
    }
    order[kept - 1]
}

/// Decodes a single candidate until end-of-sequence, `max_tokens` or a full
/// context.
pub fn decode_one<P: Policy>(policy: &P, prompt: &str, cfg: &SamplingConfig, rng: &mut ChaCha8Rng) -> Result<Candidate, PrefError> {
    let (mut session, mut logits) = policy.start(prompt)?;
    let mut words = Vec::new();
    let eos = policy.eos();
    for _ in 0..cfg.max_tokens {
        let token = sample_token(&logits, cfg, rng);
        if token == eos {
            return Ok(Candidate { sequence: words.join(" "), overflow: false });
        }
        words.push(policy.token_text(token).to_string());
        match policy.advance(&mut session, token) {
            Some(next) => logits = next,
            None => break,
        }
    }
    Ok(Candidate { sequence: words.join(" "), overflow: true })
}

/// Draws `cfg.k` candidates for one prompt. The random stream depends only on
/// `(cfg.seed, prompt_index)`, so prompts can be processed in any order.
pub fn sample_candidates<P: Policy>(
    policy: &P,
    prompt: &str,
    prompt_index: u64,
    cfg: &SamplingConfig,
) -> Result<Vec<Candidate>, PrefError> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(prompt_index);
    (0..cfg.k).map(|_| decode_one(policy, prompt, cfg, &mut rng)).collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Bigram table over a handful of words; row = previous token.
    pub struct TablePolicy {
        pub words: Vec<&'static str>,
        pub logits: Vec<Vec<f64>>,
        pub context: usize,
    }

    impl Policy for TablePolicy {
        type Session = (usize, usize);

        fn start(&self, _prompt: &str) -> Result<(Self::Session, Vec<f64>), PrefError> {
            Ok(((0, 0), self.logits[0].clone()))
        }

        fn advance(&self, s: &mut Self::Session, token: usize) -> Option<Vec<f64>> {
            s.1 += 1;
            if s.1 >= self.context {
                return None;
            }
            s.0 = token;
            Some(self.logits[token].clone())
        }

        fn token_text(&self, token: usize) -> &str {
            self.words[token]
        }

        fn eos(&self) -> usize {
            0
        }
    }

    pub fn noisy() -> TablePolicy {
        TablePolicy {
            words: vec!["<eos>", "a", "b", "c"],
            logits: vec![vec![-9.0, 0.0, 0.0, 0.0], vec![0.5, 0.0, 0.2, 0.1], vec![0.5, 0.3, 0.0, 0.1], vec![0.5, 0.1, 0.1, 0.0]],
            context: 64,
        }
    }

    #[test]
    fn greedy_gives_identical_candidates() {
        let p = noisy();
        let cfg = SamplingConfig { greedy: true, ..SamplingConfig::default() };
        let c = sample_candidates(&p, "x", 0, &cfg).unwrap();
        assert_eq!(c.len(), 5);
        assert!(c.iter().all(|x| x == &c[0]));
        assert_eq!(c[0].sequence, "a");
    }

    #[test]
    fn seeded_sampling_repeats() {
        let p = noisy();
        let cfg = SamplingConfig { temperature: 1.0, top_p: 1.0, ..SamplingConfig::default() };
        let a = sample_candidates(&p, "x", 3, &cfg).unwrap();
        assert_eq!(a, sample_candidates(&p, "x", 3, &cfg).unwrap());
        assert_ne!(a, sample_candidates(&p, "x", 4, &cfg).unwrap());
    }

    #[test]
    fn overflow_is_flagged() {
        let mut p = noisy();
        p.logits = vec![vec![-9.0, 5.0, 0.0, 0.0]; 4];
        let cfg = SamplingConfig { max_tokens: 7, ..SamplingConfig::default() };
        let c = sample_candidates(&p, "x", 0, &cfg).unwrap();
        assert!(c.iter().all(|x| x.overflow && x.sequence.split(' ').count() == 7));
        p.context = 3;
        let c = sample_candidates(&p, "x", 0, &cfg).unwrap();
        assert!(c[0].overflow && c[0].sequence.split(' ').count() == 3);
    }

    #[test]
    fn truncation_excludes_tail() {
        let logits = [3.0, 2.9, -5.0, -6.0];
        let cfg = SamplingConfig { top_k: 2, temperature: 1.0, top_p: 1.0, ..SamplingConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..500 {
            assert!(sample_token(&logits, &cfg, &mut rng) < 2);
        }
        let cfg = SamplingConfig { top_p: 0.5, temperature: 1.0, ..SamplingConfig::default() };
        for _ in 0..500 {
            assert_eq!(sample_token(&[1.0, 0.0, 0.0], &cfg, &mut rng), 0);
        }
    }

    #[test]
    fn config_checks() {
        assert!(SamplingConfig { k: 1, ..SamplingConfig::default() }.check().is_err());
        assert!(SamplingConfig { temperature: 0.0, ..SamplingConfig::default() }.check().is_err());
        assert!(SamplingConfig::default().check().is_ok());
    }
}
