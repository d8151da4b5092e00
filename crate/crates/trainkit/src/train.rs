use std::collections::BTreeMap;
use std::path::PathBuf;

use metrics::validity::is_invalid;
use prefgen::{decode_one, generate_pairs, PipelineStats, Policy, PrefError, PreferencePair, PromptItem, Scorer};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sem_core::dataset::SlRecord;
use sha2::{Digest, Sha256};

use crate::checkpoint::{self, checkpoint_name, params_hash, Sidecar, BLOB_VERSION};
use crate::config::TrainConfig;
use crate::error::TrainError;
use crate::log::LogRecord;
use crate::loss::{dpo_loss_with, mean_margin, reference_logprobs, sl_loss, Example, TokenPair};
use crate::model::{PolicyModel, Session};
use crate::optim::{clip_grad_norm, AdamW};
use crate::schedule::{Phase, ReferenceModel, Scheduler};
use crate::vocab::Vocabulary;

/// A policy model paired with its tokenizer, usable as a sampling policy.
pub struct Decoder<'a> {
    pub model: &'a PolicyModel,
    pub vocab: &'a Vocabulary,
}

impl Policy for Decoder<'_> {
    type Session = Session;

    fn start(&self, prompt: &str) -> Result<(Session, Vec<f64>), PrefError> {
        let prefix = self.vocab.prompt_prefix(prompt).map_err(|e| PrefError::Prompt(e.to_string()))?;
        let mut session = self.model.session();
        let mut logits = None;
        for t in prefix {
            logits = Some(self.model.step(&mut session, t).ok_or_else(|| PrefError::Prompt("prompt exceeds the context".into()))?);
        }
        Ok((session, logits.expect("prefix is never empty")))
    }

    fn advance(&self, session: &mut Session, token: usize) -> Option<Vec<f64>> {
        self.model.step(session, token)
    }

    fn token_text(&self, token: usize) -> &str {
        self.vocab.token(token)
    }

    fn eos(&self) -> usize {
        self.vocab.eos()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointInfo {
    pub name: String,
    pub phase: Phase,
    pub round: usize,
    pub params_sha256: String,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub ir: f64,
    pub margin: f64,
}

/// Alternating supervised / preference trainer. Use [`Trainer::initial_sl`]
/// followed by [`Trainer::round`], or [`Trainer::run`] for the whole schedule.
pub struct Trainer<'a, S: Scorer> {
    cfg: TrainConfig,
    config_hash: String,
    vocab: Vocabulary,
    scorer: &'a S,
    examples: Vec<Example>,
    vf_items: Vec<PromptItem>,
    probe_prompts: Vec<String>,
    heldout_items: Vec<PromptItem>,
    margin_pairs: Vec<TokenPair>,
    policy: PolicyModel,
    scheduler: Scheduler,
    rng: ChaCha8Rng,
    log: Vec<LogRecord>,
    checkpoints: Vec<CheckpointInfo>,
    pair_stats: Vec<PipelineStats>,
    round_pairs: Vec<Vec<PreferencePair>>,
    post_sl: Option<Probe>,
    rounds_done: usize,
    out_dir: Option<PathBuf>,
}

fn item(r: &SlRecord) -> PromptItem {
    PromptItem { text: r.text.clone(), reference: Some(r.sequence.clone()) }
}

impl<'a, S: Scorer> Trainer<'a, S> {
    /// `train` feeds the supervised phases and the preference prompts;
    /// `heldout` feeds the IR probe and the fixed margin pairs.
    pub fn new(cfg: TrainConfig, train: &[SlRecord], heldout: &[SlRecord], scorer: &'a S) -> Result<Self, TrainError> {
        cfg.check()?;
        if train.is_empty() || heldout.is_empty() {
            return Err(TrainError::EmptyData);
        }
        let vocab = Vocabulary::standard();
        let policy = PolicyModel::new(cfg.model.with_vocab(vocab.len()), cfg.seed)?;
        let examples = train
            .iter()
            .take(cfg.sl_examples)
            .map(|r| vocab.example(&r.text, &r.sequence).map(|(ids, prefix)| Example::new(ids, prefix)))
            .collect::<Result<Vec<_>, _>>()?;
        for e in &examples {
            if e.ids.len() - 1 > cfg.model.context {
                return Err(TrainError::ContextOverflow { len: e.ids.len() - 1, context: cfg.model.context });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut pool: Vec<&SlRecord> = train.iter().collect();
        pool.shuffle(&mut rng);
        let vf_items = pool.iter().take(cfg.vf_prompts).map(|r| item(r)).collect();
        Ok(Self {
            config_hash: cfg.hash(),
            probe_prompts: heldout.iter().take(cfg.probe_prompts).map(|r| r.text.clone()).collect(),
            heldout_items: heldout.iter().map(item).collect(),
            cfg,
            vocab,
            scorer,
            examples,
            vf_items,
            margin_pairs: Vec::new(),
            policy,
            scheduler: Scheduler::new(),
            rng,
            log: Vec::new(),
            checkpoints: Vec::new(),
            pair_stats: Vec::new(),
            round_pairs: Vec::new(),
            post_sl: None,
            rounds_done: 0,
            out_dir: None,
        })
    }

    /// Also write every checkpoint to `dir`.
    pub fn with_output(mut self, dir: PathBuf) -> Self {
        self.out_dir = Some(dir);
        self
    }

    /// Copies the trainer state under a new schedule, e.g. to run two
    /// variants from one shared initial SL phase. Only the round-level
    /// fields of `cfg` take effect.
    pub fn fork(&self, cfg: TrainConfig) -> Result<Self, TrainError> {
        cfg.check()?;
        Ok(Self {
            config_hash: cfg.hash(),
            cfg,
            vocab: self.vocab.clone(),
            scorer: self.scorer,
            examples: self.examples.clone(),
            vf_items: self.vf_items.clone(),
            probe_prompts: self.probe_prompts.clone(),
            heldout_items: self.heldout_items.clone(),
            margin_pairs: self.margin_pairs.clone(),
            policy: self.policy.clone(),
            scheduler: self.scheduler.clone(),
            rng: self.rng.clone(),
            log: self.log.clone(),
            checkpoints: self.checkpoints.clone(),
            pair_stats: self.pair_stats.clone(),
            round_pairs: self.round_pairs.clone(),
            post_sl: self.post_sl,
            rounds_done: self.rounds_done,
            out_dir: self.out_dir.clone(),
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn policy(&self) -> &PolicyModel {
        &self.policy
    }

    pub fn decoder(&self) -> Decoder<'_> {
        Decoder { model: &self.policy, vocab: &self.vocab }
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    pub fn phases(&self) -> &[Phase] {
        self.scheduler.phases()
    }

    pub fn checkpoints(&self) -> &[CheckpointInfo] {
        &self.checkpoints
    }

    /// Statistics of each round's preference-pair generation.
    pub fn pair_stats(&self) -> &[PipelineStats] {
        &self.pair_stats
    }

    /// Probe results right after the initial SL phase.
    /// Preference pairs used by each completed round, in round order.
    pub fn round_pairs(&self) -> &[Vec<PreferencePair>] {
        &self.round_pairs
    }

    pub fn post_sl(&self) -> Option<Probe> {
        self.post_sl
    }

    pub fn margin_pairs(&self) -> &[TokenPair] {
        &self.margin_pairs
    }

    /// Percentage of probe prompts whose single sampled answer fails to
    /// parse, render, or finish within the context.
    pub fn probe_ir(&self) -> f64 {
        let dec = self.decoder();
        let bad = self
            .probe_prompts
            .iter()
            .enumerate()
            .filter(|(i, p)| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.sampling.seed);
                rng.set_stream(*i as u64);
                match decode_one(&dec, p, &self.cfg.sampling, &mut rng) {
                    Ok(c) => c.overflow || is_invalid(&c.sequence),
                    Err(_) => true,
                }
            })
            .count();
        100.0 * bad as f64 / self.probe_prompts.len().max(1) as f64
    }

    pub fn probe_margin(&self) -> Result<f64, TrainError> {
        mean_margin(&self.policy, &self.margin_pairs)
    }

    fn tokenize(&self, pairs: &[PreferencePair]) -> Vec<TokenPair> {
        let ex = |prompt: &str, seq: &str| {
            let (ids, prefix) = self.vocab.example(prompt, seq).ok()?;
            (ids.len() - 1 <= self.cfg.model.context).then(|| Example::new(ids, prefix))
        };
        pairs
            .iter()
            .filter_map(|p| Some(TokenPair { chosen: ex(&p.prompt, &p.chosen)?, rejected: ex(&p.prompt, &p.rejected)? }))
            .collect()
    }

    fn pairs_from_policy(&self, items: &[PromptItem], seed: u64) -> Result<(Vec<PreferencePair>, PipelineStats), TrainError> {
        let sampling = prefgen::SamplingConfig { seed, ..self.cfg.sampling.clone() };
        let out = generate_pairs(&self.decoder(), items, &sampling, self.scorer, &self.cfg.pairing)?;
        Ok((out.pairs, out.stats))
    }

    fn sl_epoch(&mut self, opt: &mut AdamW) -> Result<f64, TrainError> {
        let mut order: Vec<usize> = (0..self.examples.len()).collect();
        order.shuffle(&mut self.rng);
        let mut total = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(self.cfg.batch_size) {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &self.examples[i]).collect();
            let mut lg = sl_loss(&self.policy, &batch)?;
            clip_grad_norm(&mut lg.grad, self.cfg.grad_clip);
            opt.step(self.policy.params_mut(), &lg.grad);
            total += lg.loss;
            batches += 1;
        }
        Ok(total / batches as f64)
    }

    fn sl_phase(&mut self, round: usize, epochs: usize) -> Result<Probe, TrainError> {
        self.scheduler.begin_sl()?;
        let lr = if round == 0 { self.cfg.learning_rate } else { self.cfg.round_sl_lr() };
        let mut opt = AdamW::new(self.policy.param_count(), lr);
        for epoch in 1..=epochs {
            let loss = self.sl_epoch(&mut opt)?;
            self.log.push(LogRecord::epoch(Phase::Sl, round, epoch, Some(loss)));
        }
        self.scheduler.end_sl()?;
        if epochs == 0 {
            self.log.push(LogRecord::epoch(Phase::Sl, round, 0, None));
        }
        if round == 0 {
            self.fix_margin_pairs()?;
        }
        self.finish_phase(Phase::Sl, round)
    }

    /// Draws the held-out preference pairs from the post-SL policy.
    fn fix_margin_pairs(&mut self) -> Result<(), TrainError> {
        let (pairs, _) = self.pairs_from_policy(&self.heldout_items, self.cfg.seed ^ 0x5eed)?;
        let mut tokens = self.tokenize(&pairs);
        tokens.truncate(self.cfg.margin_pairs);
        self.margin_pairs = tokens;
        Ok(())
    }

    fn finish_phase(&mut self, phase: Phase, round: usize) -> Result<Probe, TrainError> {
        let probe = Probe { ir: self.probe_ir(), margin: self.probe_margin()? };
        let last = self.log.last_mut().expect("phase logged at least one record");
        last.ir_probe = Some(probe.ir);
        last.margin = Some(probe.margin);
        let mut metrics = BTreeMap::from([("ir_probe".to_string(), probe.ir), ("margin".to_string(), probe.margin)]);
        if let Some(loss) = last.loss {
            metrics.insert("loss".into(), loss);
        }
        let name = checkpoint_name(phase, round);
        if let Some(dir) = &self.out_dir {
            let sidecar = Sidecar {
                name: name.clone(),
                blob_version: BLOB_VERSION,
                config_hash: self.config_hash.clone(),
                model: self.policy.config().clone(),
                phase,
                round,
                metrics: metrics.clone(),
                sha256: String::new(),
            };
            checkpoint::save(dir, &self.policy, sidecar)?;
        }
        self.checkpoints.push(CheckpointInfo { name, phase, round, params_sha256: params_hash(self.policy.params()), metrics });
        Ok(probe)
    }

    pub fn initial_sl(&mut self) -> Result<Probe, TrainError> {
        let probe = self.sl_phase(0, self.cfg.initial_sl_epochs)?;
        self.post_sl = Some(probe);
        Ok(probe)
    }

    /// Takes `policy` as the result of the initial supervised phase.
    pub fn initial_from(&mut self, policy: PolicyModel) -> Result<Probe, TrainError> {
        if policy.config() != self.policy.config() {
            return Err(TrainError::Config("checkpoint shape differs from the configured model".into()));
        }
        self.policy = policy;
        let probe = self.sl_phase(0, 0)?;
        self.post_sl = Some(probe);
        Ok(probe)
    }

    fn vf_phase(&mut self, round: usize, reference: &ReferenceModel, pairs: &[TokenPair]) -> Result<Probe, TrainError> {
        self.scheduler.begin_vf()?;
        let refs: Vec<&TokenPair> = pairs.iter().collect();
        let ref_lp = reference_logprobs(reference, &refs)?;
        let mut opt = AdamW::new(self.policy.param_count(), self.cfg.vf_lr());
        for epoch in 1..=self.cfg.vf_epochs {
            let mut order: Vec<usize> = (0..pairs.len()).collect();
            order.shuffle(&mut self.rng);
            let mut total = 0.0;
            let mut batches = 0;
            for chunk in order.chunks(self.cfg.pair_batch_size) {
                let batch: Vec<&TokenPair> = chunk.iter().map(|&i| &pairs[i]).collect();
                let batch_ref: Vec<(f64, f64)> = chunk.iter().map(|&i| ref_lp[i]).collect();
                let mut lg = dpo_loss_with(&self.policy, &batch, &batch_ref, self.cfg.beta)?;
                clip_grad_norm(&mut lg.grad, self.cfg.grad_clip);
                opt.step(self.policy.params_mut(), &lg.grad);
                total += lg.loss;
                batches += 1;
            }
            let loss = (batches > 0).then(|| total / batches as f64);
            self.log.push(LogRecord::epoch(Phase::Vf, round, epoch, loss));
        }
        self.scheduler.end_vf()?;
        self.finish_phase(Phase::Vf, round)
    }

    /// One block: snapshot, fresh pairs from the current policy, VF, SL.
    pub fn round(&mut self) -> Result<Probe, TrainError> {
        let round = self.rounds_done + 1;
        let reference = self.scheduler.snapshot(&self.policy)?;
        let items = self.vf_items.clone();
        let (mut pairs, stats) = self.pairs_from_policy(&items, self.cfg.sampling.seed.wrapping_add(round as u64))?;
        if let Some(n) = self.cfg.max_pairs {
            pairs.truncate(n);
        }
        let mut hasher = Sha256::new();
        for p in &pairs {
            hasher.update(serde_json::to_vec(p).expect("pairs serialize"));
            hasher.update(b"\n");
        }
        let tokens = self.tokenize(&pairs);
        self.log.push(LogRecord {
            pairs: Some(tokens.len()),
            pairs_sha256: Some(hex::encode(hasher.finalize())),
            ..LogRecord::epoch(Phase::Snapshot, round, 0, None)
        });
        self.pair_stats.push(stats);
        self.round_pairs.push(pairs);

        let vf = self.vf_phase(round, &reference, &tokens)?;
        if vf.ir > self.cfg.collapse_ir {
            return Err(TrainError::Collapse { round, ir: vf.ir, limit: self.cfg.collapse_ir, log: self.log.clone() });
        }
        let probe = self.sl_phase(round, self.cfg.sl_epochs_per_round)?;
        self.rounds_done = round;
        Ok(probe)
    }

    /// Runs whatever part of the configured schedule has not run yet.
    pub fn run(&mut self) -> Result<(), TrainError> {
        if self.post_sl.is_none() {
            self.initial_sl()?;
        }
        while self.rounds_done < self.cfg.rounds {
            self.round()?;
        }
        Ok(())
    }
}

pub struct TrainOutcome {
    pub policy: PolicyModel,
    pub log: Vec<LogRecord>,
    pub phases: Vec<Phase>,
    pub checkpoints: Vec<CheckpointInfo>,
    pub pair_stats: Vec<PipelineStats>,
}

/// Full schedule: initial SL, then `rounds` × (snapshot, pairs, VF, SL).
pub fn train_alternating<S: Scorer>(
    cfg: TrainConfig,
    train: &[SlRecord],
    heldout: &[SlRecord],
    scorer: &S,
    out_dir: Option<PathBuf>,
) -> Result<TrainOutcome, TrainError> {
    let mut t = Trainer::new(cfg, train, heldout, scorer)?;
    if let Some(dir) = out_dir {
        t = t.with_output(dir);
    }
    t.run()?;
    Ok(TrainOutcome {
        policy: t.policy.clone(),
        log: t.log.clone(),
        phases: t.phases().to_vec(),
        checkpoints: t.checkpoints.clone(),
        pair_stats: t.pair_stats.clone(),
    })
}
