//! Dense ReLU multilayer perceptron with hand-derived backpropagation and
//! minibatch SGD (momentum, weight decay, step learning-rate decay).
//!
//! Scalar output nets only: `input_dim -> hidden... -> 1`, ReLU between
//! affine layers, no activation on the output. All arithmetic is `f64`.
//! Training is single-threaded and bit-deterministic for a given build,
//! seed, and dataset.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngExt;

use crate::data::{Dataset, LabeledSample};
use crate::error::{Error, Result};
use crate::linalg;
use crate::seeds;

/// Architecture of a scalar-output ReLU MLP.
///
/// Depth counts affine layers: `hidden.len()` ReLU layers plus the affine
/// output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    input_dim: usize,
    hidden: Vec<usize>,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden: &[usize]) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidSpec("input_dim must be >= 1".into()));
        }
        if hidden.iter().any(|&w| w == 0) {
            return Err(Error::InvalidSpec("hidden widths must be >= 1".into()));
        }
        Ok(MlpSpec {
            input_dim,
            hidden: hidden.to_vec(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_widths(&self) -> &[usize] {
        &self.hidden
    }

    /// Number of affine layers (hidden layers + output).
    pub fn num_layers(&self) -> usize {
        self.hidden.len() + 1
    }

    /// `(fan_in, fan_out)` for each affine layer in order.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(self.num_layers());
        let mut fan_in = self.input_dim;
        for &w in &self.hidden {
            shapes.push((fan_in, w));
            fan_in = w;
        }
        shapes.push((fan_in, 1));
        shapes
    }

    /// Total parameter count: sum of `(fan_in + 1) * fan_out` over layers.
    pub fn param_count(&self) -> usize {
        self.layer_shapes()
            .iter()
            .map(|&(i, o)| (i + 1) * o)
            .sum()
    }
}

/// One affine layer: row-major `out_dim x in_dim` weights plus biases.
/// Also used for gradients and momentum buffers, which share the shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Layer {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
        }
    }

    pub fn from_parts(in_dim: usize, out_dim: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if weights.len() != in_dim * out_dim || biases.len() != out_dim {
            return Err(Error::InvalidSpec(format!(
                "layer shape mismatch: {}x{} with {} weights, {} biases",
                out_dim,
                in_dim,
                weights.len(),
                biases.len()
            )));
        }
        Ok(Layer {
            in_dim,
            out_dim,
            weights,
            biases,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weight_row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.in_dim..(o + 1) * self.in_dim]
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub(crate) fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }
}

/// Weights and biases of a scalar-output ReLU MLP.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<Layer>,
}

impl MlpParams {
    /// All-zero parameters for the given spec.
    pub fn zeros(spec: &MlpSpec) -> Self {
        let layers = spec
            .layer_shapes()
            .into_iter()
            .map(|(i, o)| Layer::zeros(i, o))
            .collect();
        MlpParams { layers }
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidSpec("no layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::InvalidSpec("layer widths do not chain".into()));
            }
        }
        if layers.last().unwrap().out_dim != 1 {
            return Err(Error::InvalidSpec("output layer must have width 1".into()));
        }
        Ok(MlpParams { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    /// Hidden layer count (affine layers minus the output layer).
    pub fn hidden_layer_count(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn spec(&self) -> MlpSpec {
        MlpSpec {
            input_dim: self.input_dim(),
            hidden: self.layers[..self.layers.len() - 1]
                .iter()
                .map(|l| l.out_dim)
                .collect(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| (l.in_dim + 1) * l.out_dim)
            .sum()
    }

    pub fn max_abs_weight(&self) -> f64 {
        let mut m = 0.0f64;
        for l in &self.layers {
            for v in l.weights.iter().chain(&l.biases) {
                m = m.max(v.abs());
            }
        }
        m
    }

    /// Maximum layer width, including the input layer.
    pub fn max_width(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.out_dim)
            .chain(core::iter::once(self.input_dim()))
            .max()
            .unwrap()
    }

    /// Forward pass for a single point; affine layers interleaved with
    /// `max(z, 0)`, no activation on the output.
    pub fn forward(&self, point: &[f64]) -> f64 {
        let mut score = [0.0];
        self.forward_batch(point, &mut score);
        score[0]
    }

    /// The net computing `f(scale .* x + shift)`: the affine input map is
    /// folded into the first layer's weights and biases.
    pub fn with_input_affine(&self, scale: &[f64], shift: &[f64]) -> MlpParams {
        let d = self.input_dim();
        assert_eq!(scale.len(), d, "scale dimension mismatch");
        assert_eq!(shift.len(), d, "shift dimension mismatch");
        let mut out = self.clone();
        let first = &mut out.layers[0];
        for r in 0..first.out_dim {
            let mut extra = 0.0;
            for c in 0..d {
                extra += first.weights[r * d + c] * shift[c];
                first.weights[r * d + c] *= scale[c];
            }
            first.biases[r] += extra;
        }
        out
    }

    /// Forward pass for a batch of row-major points; writes one score per row.
    pub fn forward_batch(&self, points: &[f64], scores: &mut [f64]) {
        let d = self.input_dim();
        let b = scores.len();
        assert_eq!(points.len(), b * d, "input dimension mismatch");
        let mut cur = points.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            next.clear();
            next.resize(b * layer.out_dim, 0.0);
            affine_batch(layer, &cur, b, &mut next, l < last);
            core::mem::swap(&mut cur, &mut next);
        }
        scores.copy_from_slice(&cur);
    }
}

/// Initializes weights and biases uniformly on `[-1/sqrt(fan_in), +1/sqrt(fan_in)]`
/// per layer, in a fixed draw order (layer by layer, row-major weights, then
/// biases). Deterministic given the seed.
pub fn init(spec: &MlpSpec, seed: u64) -> MlpParams {
    let mut rng = seeds::rng(seed);
    let layers = spec
        .layer_shapes()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let limit = 1.0 / libm::sqrt(fan_in as f64);
            let mut draw = || {
                let u: f64 = rng.random();
                limit * (2.0 * u - 1.0)
            };
            let weights = (0..fan_in * fan_out).map(|_| draw()).collect();
            let biases = (0..fan_out).map(|_| draw()).collect();
            Layer {
                in_dim: fan_in,
                out_dim: fan_out,
                weights,
                biases,
            }
        })
        .collect();
    MlpParams { layers }
}

fn affine_batch(layer: &Layer, input: &[f64], batch: usize, out: &mut [f64], relu: bool) {
    let ind = layer.in_dim;
    let outd = layer.out_dim;
    debug_assert_eq!(input.len(), batch * ind);
    debug_assert_eq!(out.len(), batch * outd);
    for s in 0..batch {
        let row = &input[s * ind..(s + 1) * ind];
        let orow = &mut out[s * outd..(s + 1) * outd];
        let mut o = 0;
        while o + 4 <= outd {
            let acc = linalg::dot4(&layer.weights[o * ind..(o + 4) * ind], ind, row);
            for r in 0..4 {
                let z = layer.biases[o + r] + acc[r];
                orow[o + r] = if relu { z.max(0.0) } else { z };
            }
            o += 4;
        }
        while o < outd {
            let z = layer.biases[o] + linalg::dot(layer.weight_row(o), row);
            orow[o] = if relu { z.max(0.0) } else { z };
            o += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `log(1 + exp(-y z))`
    CrossEntropy,
    /// `max(0, 1 - y z)`
    Hinge,
}

/// Loss value and d(loss)/d(score) for one sample. Subgradient 0 at the
/// hinge kink `y z = 1`.
fn loss_term(loss: LossKind, score: f64, label: i8) -> (f64, f64) {
    let y = label as f64;
    let u = y * score;
    match loss {
        LossKind::CrossEntropy => {
            let l = if u > 0.0 {
                libm::log1p(libm::exp(-u))
            } else {
                -u + libm::log1p(libm::exp(u))
            };
            // sigma(-u) = 1 / (1 + e^u), computed without overflow
            let e = libm::exp(-u.abs());
            let sig_neg = if u >= 0.0 { e / (1.0 + e) } else { 1.0 / (1.0 + e) };
            (l, -y * sig_neg)
        }
        LossKind::Hinge => {
            let m = 1.0 - u;
            if m > 0.0 { (m, -y) } else { (0.0, 0.0) }
        }
    }
}

/// Gradient of the mean batch loss, same shapes as [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    layers: Vec<Layer>,
}

impl Gradient {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Gradient {
            layers: params
                .layers
                .iter()
                .map(|l| Layer::zeros(l.in_dim, l.out_dim))
                .collect(),
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }
}

/// A batch in flat form: row-major inputs, optional per-sample score
/// offsets (the per-sample score is `net(input) + offset`), and labels.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub inputs: &'a [f64],
    pub offsets: Option<&'a [f64]>,
    pub labels: &'a [i8],
}

impl<'a> Batch<'a> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

struct Scratch {
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
    scores: Vec<f64>,
    dscores: Vec<f64>,
}

impl Scratch {
    fn new(n_hidden: usize) -> Self {
        Scratch {
            acts: vec![Vec::new(); n_hidden],
            deltas: vec![Vec::new(); n_hidden],
            scores: Vec::new(),
            dscores: Vec::new(),
        }
    }
}

/// Mean loss and its exact reverse-mode gradient over a batch.
///
/// Subgradient 0 is used at the ReLU kink `z = 0` and at the hinge kink.
pub fn loss_and_grad(params: &MlpParams, batch: &Batch<'_>, loss: LossKind) -> Result<(f64, Gradient)> {
    if batch.is_empty() {
        return Err(Error::EmptyData);
    }
    let b = batch.len();
    let d = params.input_dim();
    if batch.inputs.len() != b * d {
        return Err(Error::DimMismatch {
            expected: b * d,
            got: batch.inputs.len(),
        });
    }
    if let Some(off) = batch.offsets
        && off.len() != b
    {
        return Err(Error::DimMismatch {
            expected: b,
            got: off.len(),
        });
    }
    let mut grad = Gradient::zeros_like(params);
    let mut scratch = Scratch::new(params.hidden_layer_count());
    let value = loss_and_grad_into(params, batch, loss, &mut grad, &mut scratch);
    Ok((value, grad))
}

/// Core forward + backward; assumes shapes already validated.
fn loss_and_grad_into(
    params: &MlpParams,
    batch: &Batch<'_>,
    loss: LossKind,
    grad: &mut Gradient,
    scratch: &mut Scratch,
) -> f64 {
    let b = batch.len();
    let n_hidden = params.hidden_layer_count();

    // Forward, keeping post-activation values per hidden layer. The ReLU
    // mask is recovered from `act > 0`, which matches `z > 0`.
    for l in 0..n_hidden {
        let layer = &params.layers[l];
        let (head, tail) = scratch.acts.split_at_mut(l);
        let input: &[f64] = if l == 0 { batch.inputs } else { &head[l - 1] };
        let act = &mut tail[0];
        act.clear();
        act.resize(b * layer.out_dim, 0.0);
        affine_batch(layer, input, b, act, true);
    }
    let out_layer = &params.layers[n_hidden];
    let last_input: &[f64] = if n_hidden == 0 {
        batch.inputs
    } else {
        &scratch.acts[n_hidden - 1]
    };
    scratch.scores.clear();
    scratch.scores.resize(b, 0.0);
    affine_batch(out_layer, last_input, b, &mut scratch.scores, false);

    // Loss and d(loss)/d(score), scaled by 1/b for the mean.
    let inv_b = 1.0 / b as f64;
    scratch.dscores.clear();
    scratch.dscores.resize(b, 0.0);
    let mut total = 0.0;
    for s in 0..b {
        let offset = batch.offsets.map_or(0.0, |o| o[s]);
        let (l, dz) = loss_term(loss, scratch.scores[s] + offset, batch.labels[s]);
        total += l;
        scratch.dscores[s] = dz * inv_b;
    }

    // Backward. `delta` holds d(loss)/d(pre-activation) for the current
    // layer; zero entries skip their axpy.
    for gl in &mut grad.layers {
        gl.weights.iter_mut().for_each(|v| *v = 0.0);
        gl.biases.iter_mut().for_each(|v| *v = 0.0);
    }
    for l in (0..=n_hidden).rev() {
        let layer = &params.layers[l];
        let gl = &mut grad.layers[l];
        let outd = layer.out_dim;
        let ind = layer.in_dim;
        {
            let input: &[f64] = if l == 0 { batch.inputs } else { &scratch.acts[l - 1] };
            let delta: &[f64] = if l == n_hidden {
                &scratch.dscores
            } else {
                &scratch.deltas[l]
            };
            for s in 0..b {
                let drow = &delta[s * outd..(s + 1) * outd];
                let irow = &input[s * ind..(s + 1) * ind];
                for o in 0..outd {
                    let c = drow[o];
                    if c != 0.0 {
                        linalg::axpy(&mut gl.weights[o * ind..(o + 1) * ind], c, irow);
                        gl.biases[o] += c;
                    }
                }
            }
        }
        if l > 0 {
            let (head, tail) = scratch.deltas.split_at_mut(l - 1);
            let _ = head;
            let (down, up) = tail.split_at_mut(1);
            let delta: &[f64] = if l == n_hidden { &scratch.dscores } else { &up[0] };
            let dprev = &mut down[0];
            dprev.clear();
            dprev.resize(b * ind, 0.0);
            for s in 0..b {
                let drow = &delta[s * outd..(s + 1) * outd];
                let prow = &mut dprev[s * ind..(s + 1) * ind];
                for o in 0..outd {
                    let c = drow[o];
                    if c != 0.0 {
                        linalg::axpy(prow, c, layer.weight_row(o));
                    }
                }
            }
            let act = &scratch.acts[l - 1];
            for (dp, a) in dprev.iter_mut().zip(act) {
                if *a <= 0.0 {
                    *dp = 0.0;
                }
            }
        }
    }
    total * inv_b
}

/// SGD with momentum, weight decay, and step LR decay.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub initial_lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub total_iters: u64,
    pub lr_decay_factor: f64,
    pub lr_decay_every: u64,
    pub loss: LossKind,
    pub seed: u64,
}

impl TrainConfig {
    /// Defaults used by the experiment harness: lr 0.1, momentum 0.9,
    /// weight decay 1e-3, batch 100, 10000 iterations, lr decayed by 1/10
    /// every 2000 steps, cross-entropy loss.
    pub fn standard(seed: u64) -> Self {
        TrainConfig {
            initial_lr: 0.1,
            momentum: 0.9,
            weight_decay: 0.001,
            batch_size: 100,
            total_iters: 10_000,
            lr_decay_factor: 0.1,
            lr_decay_every: 2000,
            loss: LossKind::CrossEntropy,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return bad("initial_lr must be positive and finite");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight_decay must be nonnegative");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0) {
            return bad("lr_decay_factor must be in (0, 1]");
        }
        if self.lr_decay_every == 0 {
            return bad("lr_decay_every must be >= 1");
        }
        Ok(())
    }

    /// `initial_lr * decay_factor^floor(iter / decay_every)`.
    pub fn lr_at(&self, iter: u64) -> f64 {
        let steps = (iter / self.lr_decay_every) as f64;
        self.initial_lr * libm::pow(self.lr_decay_factor, steps)
    }
}

/// Momentum buffers plus the iteration counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState {
    velocity: Vec<Layer>,
    iter: u64,
}

impl OptState {
    pub fn new(params: &MlpParams) -> Self {
        OptState {
            velocity: params
                .layers
                .iter()
                .map(|l| Layer::zeros(l.in_dim, l.out_dim))
                .collect(),
            iter: 0,
        }
    }

    pub fn iter(&self) -> u64 {
        self.iter
    }
}

/// One optimizer step. The contract is: decay is folded into the gradient
/// before the momentum buffer update,
/// `g' = g + wd * p; v <- momentum * v + g'; p <- p - lr(iter) * v`,
/// and the iteration counter advances afterwards.
pub fn sgd_step(params: &mut MlpParams, grad: &Gradient, state: &mut OptState, cfg: &TrainConfig) {
    let lr = cfg.lr_at(state.iter);
    for ((pl, gl), vl) in params
        .layers
        .iter_mut()
        .zip(&grad.layers)
        .zip(&mut state.velocity)
    {
        for ((p, g), v) in pl
            .weights
            .iter_mut()
            .zip(&gl.weights)
            .zip(&mut vl.weights)
        {
            let gp = g + cfg.weight_decay * *p;
            *v = cfg.momentum * *v + gp;
            *p -= lr * *v;
        }
        for ((p, g), v) in pl.biases.iter_mut().zip(&gl.biases).zip(&mut vl.biases) {
            let gp = g + cfg.weight_decay * *p;
            *v = cfg.momentum * *v + gp;
            *p -= lr * *v;
        }
    }
    state.iter += 1;
}

/// Flat training data with per-sample score offsets. Logit-form training
/// uses zero offsets; boundary-form training passes `-x_d` so the per-sample
/// score is `net(x_{-d}) - x_d`.
pub(crate) struct ScoredData<'a> {
    pub dim: usize,
    pub inputs: &'a [f64],
    pub offsets: Option<&'a [f64]>,
    pub labels: &'a [i8],
}

pub(crate) fn train_engine(data: &ScoredData<'_>, spec: &MlpSpec, cfg: &TrainConfig) -> Result<MlpParams> {
    cfg.validate()?;
    let n = data.labels.len();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    if spec.input_dim() != data.dim {
        return Err(Error::DimMismatch {
            expected: spec.input_dim(),
            got: data.dim,
        });
    }
    debug_assert_eq!(data.inputs.len(), n * data.dim);

    let mut params = init(spec, seeds::mix(cfg.seed, STREAM_INIT));
    if cfg.total_iters == 0 {
        return Ok(params);
    }
    let mut state = OptState::new(&params);
    let mut grad = Gradient::zeros_like(&params);
    let mut scratch = Scratch::new(params.hidden_layer_count());
    let mut rng = seeds::rng(seeds::mix(cfg.seed, STREAM_BATCH));

    let b = cfg.batch_size;
    let d = data.dim;
    let mut binputs = vec![0.0; b * d];
    let mut boffsets = vec![0.0; b];
    let mut blabels = vec![0i8; b];

    for _ in 0..cfg.total_iters {
        // Batches are sampled with replacement from a seeded stream.
        for s in 0..b {
            let idx = rng.random_range(0..n);
            binputs[s * d..(s + 1) * d].copy_from_slice(&data.inputs[idx * d..(idx + 1) * d]);
            boffsets[s] = data.offsets.map_or(0.0, |o| o[idx]);
            blabels[s] = data.labels[idx];
        }
        let batch = Batch {
            inputs: &binputs,
            offsets: data.offsets.map(|_| &boffsets[..]),
            labels: &blabels,
        };
        loss_and_grad_into(&params, &batch, cfg.loss, &mut grad, &mut scratch);
        sgd_step(&mut params, &grad, &mut state, cfg);
    }
    Ok(params)
}

const STREAM_INIT: u64 = 0x11;
const STREAM_BATCH: u64 = 0x22;

/// Trains a logit-form classifier net on the dataset: `total_iters` steps,
/// batches drawn with replacement from the config's seed stream. Output is
/// bit-identical for identical `(dataset, spec, config)`.
pub fn train(data: &Dataset, spec: &MlpSpec, cfg: &TrainConfig) -> Result<MlpParams> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    train_engine(
        &ScoredData {
            dim: data.dim(),
            inputs: data.points_flat(),
            offsets: None,
            labels: data.labels(),
        },
        spec,
        cfg,
    )
}

/// Convenience wrapper building a [`Batch`] from sample views.
pub fn batch_from_samples<'a>(
    samples: &[LabeledSample<'_>],
    inputs: &'a mut Vec<f64>,
    labels: &'a mut Vec<i8>,
) -> Batch<'a> {
    inputs.clear();
    labels.clear();
    for s in samples {
        inputs.extend_from_slice(s.point);
        labels.push(s.label);
    }
    Batch {
        inputs,
        offsets: None,
        labels,
    }
}
