use prefgen::{OracleConfig, PairConfig, SamplingConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::TrainError;
use crate::model::ModelConfig;

/// Network shape; the vocabulary size comes from the tokenizer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelShape {
    pub d_model: usize,
    pub layers: usize,
    pub heads: usize,
    pub d_ff: usize,
    pub context: usize,
}

impl Default for ModelShape {
    fn default() -> Self {
        let t = ModelConfig::toy(0);
        Self { d_model: t.d_model, layers: t.layers, heads: t.heads, d_ff: t.d_ff, context: t.context }
    }
}

impl ModelShape {
    pub fn with_vocab(&self, vocab: usize) -> ModelConfig {
        ModelConfig { vocab, d_model: self.d_model, layers: self.layers, heads: self.heads, d_ff: self.d_ff, context: self.context }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub initial_sl_epochs: usize,
    pub rounds: usize,
    pub vf_epochs: usize,
    pub sl_epochs_per_round: usize,
    pub beta: f64,
    pub learning_rate: f64,
    /// Learning rate of the preference phases; `None` reuses `learning_rate`.
    pub vf_learning_rate: Option<f64>,
    /// Learning rate of the supervised phases inside rounds; `None` reuses
    /// `learning_rate`.
    pub round_sl_learning_rate: Option<f64>,
    pub batch_size: usize,
    pub pair_batch_size: usize,
    pub grad_clip: f64,
    pub seed: u64,
    /// Number of supervised (prompt, sequence) examples.
    pub sl_examples: usize,
    /// Prompts sampled per round for preference pairs.
    pub vf_prompts: usize,
    /// Upper bound on preference pairs used per round.
    pub max_pairs: Option<usize>,
    pub probe_prompts: usize,
    pub margin_pairs: usize,
    /// Probe IR (percent) after a preference phase that aborts training.
    pub collapse_ir: f64,
    pub model: ModelShape,
    pub sampling: SamplingConfig,
    pub pairing: PairConfig,
    pub oracle: OracleConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            initial_sl_epochs: 40,
            rounds: 5,
            vf_epochs: 5,
            sl_epochs_per_round: 1,
            beta: 0.1,
            learning_rate: 1e-4,
            vf_learning_rate: None,
            round_sl_learning_rate: None,
            batch_size: 32,
            pair_batch_size: 16,
            grad_clip: 1.0,
            seed: 42,
            sl_examples: 2000,
            vf_prompts: 1000,
            max_pairs: None,
            probe_prompts: 200,
            margin_pairs: 100,
            collapse_ir: 95.0,
            model: ModelShape::default(),
            sampling: SamplingConfig::default(),
            pairing: PairConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

impl TrainConfig {
    /// Learning rates for training the toy network from scratch.
    pub fn toy() -> Self {
        Self { learning_rate: 3e-3, vf_learning_rate: Some(1e-4), round_sl_learning_rate: Some(3e-5), ..Self::default() }
    }

    /// Shortened initial supervised phase.
    pub fn fast(self) -> Self {
        Self { initial_sl_epochs: 8, ..self }
    }

    pub fn from_toml(text: &str) -> Result<Self, TrainError> {
        let cfg: Self = toml::from_str(text).map_err(|e| TrainError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn vf_lr(&self) -> f64 {
        self.vf_learning_rate.unwrap_or(self.learning_rate)
    }

    pub fn round_sl_lr(&self) -> f64 {
        self.round_sl_learning_rate.unwrap_or(self.learning_rate)
    }

    pub fn check(&self) -> Result<(), TrainError> {
        let fail = |m: &str| Err(TrainError::Config(m.to_string()));
        if !(self.beta > 0.0) {
            return fail("beta must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.vf_lr() > 0.0) || !(self.round_sl_lr() > 0.0) {
            return fail("learning rates must be positive");
        }
        if self.initial_sl_epochs == 0 {
            return fail("initial_sl_epochs must be at least 1");
        }
        if self.rounds > 0 && self.vf_epochs == 0 {
            return fail("vf_epochs must be at least 1 when rounds > 0");
        }
        if self.batch_size == 0 || self.pair_batch_size == 0 || self.sl_examples == 0 {
            return fail("batch sizes and sl_examples must be at least 1");
        }
        if self.rounds > 0 && self.vf_prompts == 0 {
            return fail("vf_prompts must be at least 1 when rounds > 0");
        }
        if !(self.grad_clip > 0.0) {
            return fail("grad_clip must be positive");
        }
        self.sampling.check().map_err(|e| TrainError::Config(e.to_string()))?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }
}
