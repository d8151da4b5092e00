use ndarray::Array2;

use crate::error::TrainError;
use crate::model::{PolicyModel, Trace};
use crate::schedule::ReferenceModel;

/// A tokenized training sequence: `ids[..prefix]` conditions, the rest is
/// scored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub ids: Vec<usize>,
    pub prefix: usize,
}

impl Example {
    pub fn new(ids: Vec<usize>, prefix: usize) -> Self {
        assert!(prefix >= 1 && prefix < ids.len(), "example needs a prefix and at least one target");
        Self { ids, prefix }
    }

    fn input(&self) -> &[usize] {
        &self.ids[..self.ids.len() - 1]
    }

    /// Number of scored tokens.
    pub fn targets(&self) -> usize {
        self.ids.len() - self.prefix
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenPair {
    pub chosen: Example,
    pub rejected: Example,
}

#[derive(Clone, Debug)]
pub struct LossGrad {
    pub loss: f64,
    pub grad: Vec<f64>,
}

fn run(model: &PolicyModel, examples: &[&Example]) -> Result<(Trace, Vec<Vec<f64>>), TrainError> {
    let inputs: Vec<&[usize]> = examples.iter().map(|e| e.input()).collect();
    let trace = model.forward(&inputs)?;
    let per_token = examples
        .iter()
        .zip(trace.segments())
        .map(|(e, &(start, _))| (e.prefix..e.ids.len()).map(|j| trace.logp[[start + j - 1, e.ids[j]]]).collect())
        .collect();
    Ok((trace, per_token))
}

/// Gradient of `Σ_e coef[e] · Σ_t log p(target)` over the scored tokens.
fn logprob_grad(model: &PolicyModel, trace: &Trace, examples: &[&Example], coef: &[f64]) -> Vec<f64> {
    let mut dlogits = Array2::zeros(trace.logp.raw_dim());
    for ((e, &(start, _)), &c) in examples.iter().zip(trace.segments()).zip(coef) {
        for j in e.prefix..e.ids.len() {
            let row = start + j - 1;
            for (d, lp) in dlogits.row_mut(row).iter_mut().zip(trace.logp.row(row)) {
                *d = -c * lp.exp();
            }
            dlogits[[row, e.ids[j]]] += c;
        }
    }
    model.backward(trace, &dlogits)
}

/// Per-token log-probabilities of each example's scored tokens.
pub fn token_logprobs(model: &PolicyModel, examples: &[&Example]) -> Result<Vec<Vec<f64>>, TrainError> {
    Ok(run(model, examples)?.1)
}

/// Summed log-probability of each example's scored tokens.
pub fn seq_logprobs(model: &PolicyModel, examples: &[&Example]) -> Result<Vec<f64>, TrainError> {
    Ok(token_logprobs(model, examples)?.iter().map(|t| t.iter().sum()).collect())
}

pub fn seq_logprob(model: &PolicyModel, example: &Example) -> Result<f64, TrainError> {
    Ok(seq_logprobs(model, &[example])?[0])
}

/// Cross-entropy on the scored tokens: mean per sequence, then mean over the
/// batch.
pub fn sl_loss(model: &PolicyModel, batch: &[&Example]) -> Result<LossGrad, TrainError> {
    if batch.is_empty() {
        return Err(TrainError::EmptyData);
    }
    let (trace, per_token) = run(model, batch)?;
    let b = batch.len() as f64;
    let loss = per_token.iter().map(|t| -t.iter().sum::<f64>() / t.len() as f64).sum::<f64>() / b;
    let coef: Vec<f64> = batch.iter().map(|e| -1.0 / (b * e.targets() as f64)).collect();
    Ok(LossGrad { loss, grad: logprob_grad(model, &trace, batch, &coef) })
}

/// `-log σ(β·delta)`, evaluated stably.
pub fn dpo_objective(delta: f64, beta: f64) -> f64 {
    let x = beta * delta;
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Reference log-probabilities `(chosen, rejected)` for each pair.
pub fn reference_logprobs(reference: &ReferenceModel, pairs: &[&TokenPair]) -> Result<Vec<(f64, f64)>, TrainError> {
    let examples: Vec<&Example> = pairs.iter().flat_map(|p| [&p.chosen, &p.rejected]).collect();
    let lp = seq_logprobs(reference.model(), &examples)?;
    Ok(lp.chunks(2).map(|c| (c[0], c[1])).collect())
}

/// Preference loss against precomputed reference log-probabilities.
pub fn dpo_loss_with(policy: &PolicyModel, pairs: &[&TokenPair], reference: &[(f64, f64)], beta: f64) -> Result<LossGrad, TrainError> {
    if pairs.is_empty() {
        return Err(TrainError::EmptyData);
    }
    assert_eq!(pairs.len(), reference.len(), "one reference entry per pair");
    let examples: Vec<&Example> = pairs.iter().flat_map(|p| [&p.chosen, &p.rejected]).collect();
    let (trace, per_token) = run(policy, &examples)?;
    let b = pairs.len() as f64;
    let mut loss = 0.0;
    let mut coef = Vec::with_capacity(examples.len());
    for (lp, &(ref_w, ref_l)) in per_token.chunks(2).zip(reference) {
        let (w, l): (f64, f64) = (lp[0].iter().sum(), lp[1].iter().sum());
        let delta = (w - ref_w) - (l - ref_l);
        loss += dpo_objective(delta, beta);
        let pull = beta * (1.0 - sigmoid(beta * delta)) / b;
        coef.extend([-pull, pull]);
    }
    Ok(LossGrad { loss: loss / b, grad: logprob_grad(policy, &trace, &examples, &coef) })
}

pub fn dpo_loss(policy: &PolicyModel, reference: &ReferenceModel, pairs: &[&TokenPair], beta: f64) -> Result<LossGrad, TrainError> {
    let refs = reference_logprobs(reference, pairs)?;
    dpo_loss_with(policy, pairs, &refs, beta)
}

/// Mean of `log p(chosen) - log p(rejected)` over the pairs.
pub fn mean_margin(model: &PolicyModel, pairs: &[TokenPair]) -> Result<f64, TrainError> {
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for chunk in pairs.chunks(16) {
        let examples: Vec<&Example> = chunk.iter().flat_map(|p| [&p.chosen, &p.rejected]).collect();
        total += seq_logprobs(model, &examples)?.chunks(2).map(|c| c[0] - c[1]).sum::<f64>();
    }
    Ok(total / pairs.len() as f64)
}
