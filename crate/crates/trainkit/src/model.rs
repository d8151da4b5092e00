//! Small pre-norm decoder-only transformer with a hand-written backward pass.
//!
//! All parameters live in one flat buffer; gradients use the same layout, so
//! the optimizer and checkpoints treat the model as a single vector.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::TrainError;

const NORM_EPS: f64 = 1e-6;
const INIT_STD: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab: usize,
    pub d_model: usize,
    pub layers: usize,
    pub heads: usize,
    pub d_ff: usize,
    pub context: usize,
}

impl ModelConfig {
    pub fn toy(vocab: usize) -> Self {
        Self { vocab, d_model: 64, layers: 2, heads: 4, d_ff: 256, context: 160 }
    }

    pub fn check(&self) -> Result<(), TrainError> {
        let dims = [self.vocab, self.d_model, self.layers, self.heads, self.d_ff, self.context];
        if dims.contains(&0) {
            return Err(TrainError::Config("model dimensions must be positive".into()));
        }
        if self.d_model % self.heads != 0 {
            return Err(TrainError::Config(format!("d_model {} not divisible by {} heads", self.d_model, self.heads)));
        }
        Ok(())
    }

    fn head_dim(&self) -> usize {
        self.d_model / self.heads
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Block {
    off: usize,
    rows: usize,
    cols: usize,
}

impl Block {
    fn range(&self) -> std::ops::Range<usize> {
        self.off..self.off + self.rows * self.cols
    }

    fn mat<'a>(&self, p: &'a [f64]) -> ArrayView2<'a, f64> {
        ArrayView2::from_shape((self.rows, self.cols), &p[self.range()]).unwrap()
    }

    fn mat_mut<'a>(&self, p: &'a mut [f64]) -> ArrayViewMut2<'a, f64> {
        ArrayViewMut2::from_shape((self.rows, self.cols), &mut p[self.range()]).unwrap()
    }

    fn vec<'a>(&self, p: &'a [f64]) -> ArrayView1<'a, f64> {
        ArrayView1::from(&p[self.range()])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct LayerLayout {
    norm_attn: Block,
    wq: Block,
    wk: Block,
    wv: Block,
    wo: Block,
    norm_ff: Block,
    w_in: Block,
    b_in: Block,
    w_out: Block,
    b_out: Block,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Layout {
    token: Block,
    position: Block,
    layers: Vec<LayerLayout>,
    norm_final: Block,
    head: Block,
    head_bias: Block,
    len: usize,
}

impl Layout {
    fn new(cfg: &ModelConfig) -> Self {
        let mut len = 0;
        let mut alloc = |rows, cols| {
            let b = Block { off: len, rows, cols };
            len += rows * cols;
            b
        };
        let (d, f) = (cfg.d_model, cfg.d_ff);
        let token = alloc(cfg.vocab, d);
        let position = alloc(cfg.context, d);
        let layers = (0..cfg.layers)
            .map(|_| LayerLayout {
                norm_attn: alloc(1, d),
                wq: alloc(d, d),
                wk: alloc(d, d),
                wv: alloc(d, d),
                wo: alloc(d, d),
                norm_ff: alloc(1, d),
                w_in: alloc(d, f),
                b_in: alloc(1, f),
                w_out: alloc(f, d),
                b_out: alloc(1, d),
            })
            .collect();
        let norm_final = alloc(1, d);
        let head = alloc(d, cfg.vocab);
        let head_bias = alloc(1, cfg.vocab);
        Self { token, position, layers, norm_final, head, head_bias, len }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyModel {
    cfg: ModelConfig,
    layout: Layout,
    params: Vec<f64>,
}

struct LayerTrace {
    input: Array2<f64>,
    attn_in: Array2<f64>,
    attn_inv: Array1<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    /// Attention weights per (segment, head).
    probs: Vec<Array2<f64>>,
    mixed: Array2<f64>,
    resid: Array2<f64>,
    ff_in: Array2<f64>,
    ff_inv: Array1<f64>,
    pre_act: Array2<f64>,
    act: Array2<f64>,
}

/// Activations kept from a forward pass for the backward pass.
pub struct Trace {
    tokens: Vec<usize>,
    positions: Vec<usize>,
    segments: Vec<(usize, usize)>,
    layers: Vec<LayerTrace>,
    last: Array2<f64>,
    normed: Array2<f64>,
    final_inv: Array1<f64>,
    /// Row-wise log-softmax of the output logits.
    pub logp: Array2<f64>,
}

impl Trace {
    /// (start row, length) of each input segment.
    pub fn segments(&self) -> &[(usize, usize)] {
        &self.segments
    }

    pub fn rows(&self) -> usize {
        self.tokens.len()
    }
}

fn rms_norm(x: &Array2<f64>, gain: ArrayView1<f64>) -> (Array2<f64>, Array1<f64>) {
    let d = x.ncols() as f64;
    let inv = x.map_axis(Axis(1), |r| 1.0 / (r.dot(&r) / d + NORM_EPS).sqrt());
    let mut y = x.clone();
    for (mut row, &s) in y.rows_mut().into_iter().zip(&inv) {
        row *= s;
        row *= &gain;
    }
    (y, inv)
}

fn rms_norm_back(x: &Array2<f64>, inv: &Array1<f64>, gain: ArrayView1<f64>, dy: &Array2<f64>, dgain: &mut [f64]) -> Array2<f64> {
    let d = x.ncols() as f64;
    let mut dx = Array2::zeros(x.raw_dim());
    for (((xr, dyr), mut dxr), &s) in x.rows().into_iter().zip(dy.rows()).zip(dx.rows_mut()).zip(inv) {
        let xhat = &xr * s;
        for (g, (a, b)) in dgain.iter_mut().zip(dyr.iter().zip(&xhat)) {
            *g += a * b;
        }
        let dxhat = &dyr * &gain;
        let mean = dxhat.dot(&xhat) / d;
        dxr.assign(&((&dxhat - &(&xhat * mean)) * s));
    }
    dx
}

const GELU_C: f64 = 0.797_884_560_802_865_4;
const GELU_K: f64 = 0.044_715;

fn gelu(u: f64) -> f64 {
    0.5 * u * (1.0 + (GELU_C * (u + GELU_K * u * u * u)).tanh())
}

fn gelu_grad(u: f64) -> f64 {
    let t = (GELU_C * (u + GELU_K * u * u * u)).tanh();
    0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_K * u * u)
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
}

/// Log-softmax of a logit row.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    logits.iter().map(|x| x - lse).collect()
}

fn add_rows(x: &mut Array2<f64>, bias: ArrayView1<f64>) {
    for mut row in x.rows_mut() {
        row += &bias;
    }
}

fn sum_rows_into(x: &Array2<f64>, out: &mut [f64]) {
    for row in x.rows() {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
}

/// `g += aᵀ b` into a gradient block.
fn accumulate_outer(g: &mut [f64], block: Block, a: &Array2<f64>, b: &Array2<f64>) {
    general_mat_mul(1.0, &a.t(), b, 1.0, &mut block.mat_mut(g));
}

impl PolicyModel {
    pub fn new(cfg: ModelConfig, seed: u64) -> Result<Self, TrainError> {
        cfg.check()?;
        let layout = Layout::new(&cfg);
        let mut params = vec![0.0; layout.len];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |p: &mut [f64], b: Block, std: f64| {
            let a = std * 3f64.sqrt();
            for x in &mut p[b.range()] {
                *x = rng.random_range(-a..a);
            }
        };
        let deep = INIT_STD / (2.0 * cfg.layers as f64).sqrt();
        fill(&mut params, layout.token, INIT_STD);
        fill(&mut params, layout.position, INIT_STD);
        for l in &layout.layers {
            for b in [l.wq, l.wk, l.wv, l.w_in] {
                fill(&mut params, b, INIT_STD);
            }
            fill(&mut params, l.wo, deep);
            fill(&mut params, l.w_out, deep);
            params[l.norm_attn.range()].fill(1.0);
            params[l.norm_ff.range()].fill(1.0);
        }
        params[layout.norm_final.range()].fill(1.0);
        fill(&mut params, layout.head, INIT_STD);
        Ok(Self { cfg, layout, params })
    }

    /// Rebuilds a model from a flat parameter vector.
    pub fn from_params(cfg: ModelConfig, params: Vec<f64>) -> Result<Self, TrainError> {
        cfg.check()?;
        let layout = Layout::new(&cfg);
        if params.len() != layout.len {
            return Err(TrainError::Checkpoint(format!("expected {} parameters, got {}", layout.len, params.len())));
        }
        Ok(Self { cfg, layout, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.layout.len
    }

    fn check_segments(&self, inputs: &[&[usize]]) -> Result<(), TrainError> {
        for seg in inputs {
            if seg.len() > self.cfg.context {
                return Err(TrainError::ContextOverflow { len: seg.len(), context: self.cfg.context });
            }
            if let Some(&t) = seg.iter().find(|&&t| t >= self.cfg.vocab) {
                return Err(TrainError::Vocabulary(format!("token id {t} out of range")));
            }
        }
        Ok(())
    }

    /// Runs packed, independently masked input segments through the network.
    /// Row `i` of the result predicts the token after input row `i`.
    pub fn forward(&self, inputs: &[&[usize]]) -> Result<Trace, TrainError> {
        self.check_segments(inputs)?;
        let p = &self.params[..];
        let d = self.cfg.d_model;
        let mut segments = Vec::with_capacity(inputs.len());
        let mut tokens = Vec::new();
        let mut positions = Vec::new();
        for seg in inputs {
            segments.push((tokens.len(), seg.len()));
            tokens.extend_from_slice(seg);
            positions.extend(0..seg.len());
        }
        let n = tokens.len();
        let (tok, pos) = (self.layout.token.mat(p), self.layout.position.mat(p));
        let mut x = Array2::zeros((n, d));
        for (i, mut row) in x.rows_mut().into_iter().enumerate() {
            row.assign(&(&tok.row(tokens[i]) + &pos.row(positions[i])));
        }
        let mut layers = Vec::with_capacity(self.cfg.layers);
        for l in &self.layout.layers {
            let (attn_in, attn_inv) = rms_norm(&x, l.norm_attn.vec(p));
            let q = attn_in.dot(&l.wq.mat(p));
            let k = attn_in.dot(&l.wk.mat(p));
            let v = attn_in.dot(&l.wv.mat(p));
            let (mixed, probs) = self.attend(&q, &k, &v, &segments);
            let resid = &x + &mixed.dot(&l.wo.mat(p));
            let (ff_in, ff_inv) = rms_norm(&resid, l.norm_ff.vec(p));
            let mut pre_act = ff_in.dot(&l.w_in.mat(p));
            add_rows(&mut pre_act, l.b_in.vec(p));
            let act = pre_act.mapv(gelu);
            let mut out = &resid + &act.dot(&l.w_out.mat(p));
            add_rows(&mut out, l.b_out.vec(p));
            let input = std::mem::replace(&mut x, out);
            layers.push(LayerTrace { input, attn_in, attn_inv, q, k, v, probs, mixed, resid, ff_in, ff_inv, pre_act, act });
        }
        let (normed, final_inv) = rms_norm(&x, self.layout.norm_final.vec(p));
        let mut logp = normed.dot(&self.layout.head.mat(p));
        add_rows(&mut logp, self.layout.head_bias.vec(p));
        for mut row in logp.rows_mut() {
            let lp = log_softmax(row.as_slice().unwrap());
            row.assign(&ArrayView1::from(&lp));
        }
        Ok(Trace { tokens, positions, segments, layers, last: x, normed, final_inv, logp })
    }

    fn attend(&self, q: &Array2<f64>, k: &Array2<f64>, v: &Array2<f64>, segments: &[(usize, usize)]) -> (Array2<f64>, Vec<Array2<f64>>) {
        let dh = self.cfg.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();
        let mut out = Array2::zeros(q.raw_dim());
        let mut probs = Vec::with_capacity(segments.len() * self.cfg.heads);
        for &(start, len) in segments {
            for h in 0..self.cfg.heads {
                let (rows, cols) = (start..start + len, h * dh..(h + 1) * dh);
                let qh = q.slice(s![rows.clone(), cols.clone()]);
                let kh = k.slice(s![rows.clone(), cols.clone()]);
                let mut scores = qh.dot(&kh.t()) * scale;
                for (i, mut row) in scores.rows_mut().into_iter().enumerate() {
                    let row = row.as_slice_mut().unwrap();
                    row[i + 1..].fill(f64::NEG_INFINITY);
                    softmax_in_place(row);
                }
                out.slice_mut(s![rows.clone(), cols.clone()]).assign(&scores.dot(&v.slice(s![rows, cols])));
                probs.push(scores);
            }
        }
        (out, probs)
    }

    /// Gradient of `Σ dlogits ⊙ logits` with respect to every parameter.
    pub fn backward(&self, trace: &Trace, dlogits: &Array2<f64>) -> Vec<f64> {
        let p = &self.params[..];
        let mut g = vec![0.0; self.layout.len];
        let lay = &self.layout;
        accumulate_outer(&mut g, lay.head, &trace.normed, dlogits);
        sum_rows_into(dlogits, &mut g[lay.head_bias.range()]);
        let dnormed = dlogits.dot(&lay.head.mat(p).t());
        let mut dx = rms_norm_back(&trace.last, &trace.final_inv, lay.norm_final.vec(p), &dnormed, &mut g[lay.norm_final.range()]);

        for (l, t) in lay.layers.iter().zip(&trace.layers).rev() {
            accumulate_outer(&mut g, l.w_out, &t.act, &dx);
            sum_rows_into(&dx, &mut g[l.b_out.range()]);
            let mut dpre = dx.dot(&l.w_out.mat(p).t());
            dpre.zip_mut_with(&t.pre_act, |dz, &u| *dz *= gelu_grad(u));
            accumulate_outer(&mut g, l.w_in, &t.ff_in, &dpre);
            sum_rows_into(&dpre, &mut g[l.b_in.range()]);
            let dff_in = dpre.dot(&l.w_in.mat(p).t());
            let dresid = &dx + &rms_norm_back(&t.resid, &t.ff_inv, l.norm_ff.vec(p), &dff_in, &mut g[l.norm_ff.range()]);

            accumulate_outer(&mut g, l.wo, &t.mixed, &dresid);
            let dmixed = dresid.dot(&l.wo.mat(p).t());
            let (dq, dk, dv) = self.attend_back(t, &dmixed, &trace.segments);
            accumulate_outer(&mut g, l.wq, &t.attn_in, &dq);
            accumulate_outer(&mut g, l.wk, &t.attn_in, &dk);
            accumulate_outer(&mut g, l.wv, &t.attn_in, &dv);
            let dattn_in = dq.dot(&l.wq.mat(p).t()) + dk.dot(&l.wk.mat(p).t()) + dv.dot(&l.wv.mat(p).t());
            dx = dresid + rms_norm_back(&t.input, &t.attn_inv, l.norm_attn.vec(p), &dattn_in, &mut g[l.norm_attn.range()]);
        }

        let d = self.cfg.d_model;
        for (i, row) in dx.rows().into_iter().enumerate() {
            let (tok, pos) = (lay.token.off + trace.tokens[i] * d, lay.position.off + trace.positions[i] * d);
            for (j, v) in row.iter().enumerate() {
                g[tok + j] += v;
                g[pos + j] += v;
            }
        }
        g
    }

    fn attend_back(&self, t: &LayerTrace, dout: &Array2<f64>, segments: &[(usize, usize)]) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        let dh = self.cfg.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();
        let mut dq = Array2::zeros(t.q.raw_dim());
        let mut dk = Array2::zeros(t.k.raw_dim());
        let mut dv = Array2::zeros(t.v.raw_dim());
        for (si, &(start, len)) in segments.iter().enumerate() {
            for h in 0..self.cfg.heads {
                let (rows, cols) = (start..start + len, h * dh..(h + 1) * dh);
                let probs = &t.probs[si * self.cfg.heads + h];
                let dout_h = dout.slice(s![rows.clone(), cols.clone()]);
                let vh = t.v.slice(s![rows.clone(), cols.clone()]);
                dv.slice_mut(s![rows.clone(), cols.clone()]).assign(&probs.t().dot(&dout_h));
                let mut dscores = dout_h.dot(&vh.t());
                for (mut dr, pr) in dscores.rows_mut().into_iter().zip(probs.rows()) {
                    let inner = dr.dot(&pr);
                    dr.zip_mut_with(&pr, |d, &p| *d = p * (*d - inner) * scale);
                }
                let qh = t.q.slice(s![rows.clone(), cols.clone()]);
                let kh = t.k.slice(s![rows.clone(), cols.clone()]);
                dq.slice_mut(s![rows.clone(), cols.clone()]).assign(&dscores.dot(&kh));
                dk.slice_mut(s![rows, cols]).assign(&dscores.t().dot(&qh));
            }
        }
        (dq, dk, dv)
    }

    pub fn session(&self) -> Session {
        let empty = Array2::zeros((0, self.cfg.d_model));
        Session { len: 0, keys: vec![empty.clone(); self.cfg.layers], values: vec![empty; self.cfg.layers] }
    }

    /// Feeds one token through the cached decoder and returns the next-token
    /// logits, or `None` once the context is full.
    pub fn step(&self, session: &mut Session, token: usize) -> Option<Vec<f64>> {
        if session.len >= self.cfg.context || token >= self.cfg.vocab {
            return None;
        }
        let p = &self.params[..];
        let (d, dh) = (self.cfg.d_model, self.cfg.head_dim());
        let scale = 1.0 / (dh as f64).sqrt();
        let lay = &self.layout;
        let mut x = (&lay.token.mat(p).row(token) + &lay.position.mat(p).row(session.len)).into_shape_with_order((1, d)).unwrap();
        for (li, l) in lay.layers.iter().enumerate() {
            let (a, _) = rms_norm(&x, l.norm_attn.vec(p));
            let q = a.dot(&l.wq.mat(p));
            session.keys[li].push_row(a.dot(&l.wk.mat(p)).row(0)).unwrap();
            session.values[li].push_row(a.dot(&l.wv.mat(p)).row(0)).unwrap();
            let (keys, values) = (&session.keys[li], &session.values[li]);
            let mut mixed = Array2::zeros((1, d));
            for h in 0..self.cfg.heads {
                let cols = h * dh..(h + 1) * dh;
                let qh = q.slice(s![0, cols.clone()]);
                let mut w: Array1<f64> = keys.slice(s![.., cols.clone()]).dot(&qh) * scale;
                softmax_in_place(w.as_slice_mut().unwrap());
                mixed.slice_mut(s![0, cols.clone()]).assign(&w.dot(&values.slice(s![.., cols])));
            }
            let resid = &x + &mixed.dot(&l.wo.mat(p));
            let (b, _) = rms_norm(&resid, l.norm_ff.vec(p));
            let mut u = b.dot(&l.w_in.mat(p));
            add_rows(&mut u, l.b_in.vec(p));
            let mut out = &resid + &u.mapv(gelu).dot(&l.w_out.mat(p));
            add_rows(&mut out, l.b_out.vec(p));
            x = out;
        }
        session.len += 1;
        let (f, _) = rms_norm(&x, lay.norm_final.vec(p));
        let logits = f.dot(&lay.head.mat(p)) + &lay.head_bias.vec(p);
        Some(logits.into_raw_vec_and_offset().0)
    }
}

/// Key/value cache for incremental decoding.
#[derive(Clone, Debug)]
pub struct Session {
    len: usize,
    keys: Vec<Array2<f64>>,
    values: Vec<Array2<f64>>,
}

impl Session {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}
