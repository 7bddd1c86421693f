//! Risk, accuracy, and excess-risk evaluation against the exact synthetic
//! oracle, plus log-log rate fitting.
//!
//! Monte-Carlo evaluation follows a deterministic chunk protocol: points
//! are drawn in fixed-size chunks, chunk `c` from the stream
//! `mix(seed, c)`, and partial sums are reduced pairwise in chunk order.
//! Parallel drivers that evaluate chunks out of order and reduce in index
//! order produce bit-identical results to the sequential loop here.

use alloc::vec::Vec;

use rand::RngExt;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::fit::{self, LineFit};
use crate::localized::LocalizedModel;
use crate::mlp::MlpParams;
use crate::quad;
use crate::seeds;
use crate::synth::{self, SyntheticTask};
use crate::theory;

/// Maps points to labels in `{-1, +1}`.
pub trait Classifier {
    fn classify(&self, point: &[f64]) -> i8;

    /// Batch form over row-major points; the default loops `classify`.
    fn classify_batch(&self, points: &[f64], dim: usize, out: &mut [i8]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.classify(&points[i * dim..(i + 1) * dim]);
        }
    }
}

/// The exact Bayes rule of the synthetic task.
#[derive(Debug, Clone, Copy)]
pub struct BayesClassifier;

impl Classifier for BayesClassifier {
    fn classify(&self, point: &[f64]) -> i8 {
        synth::bayes_label(point)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantClassifier(pub i8);

impl Classifier for ConstantClassifier {
    fn classify(&self, _point: &[f64]) -> i8 {
        self.0
    }
}

/// A logit-form net: the label is the sign of the score, ties to `+1`.
pub struct LogitNet<'a>(pub &'a MlpParams);

impl Classifier for LogitNet<'_> {
    fn classify(&self, point: &[f64]) -> i8 {
        if self.0.forward(point) >= 0.0 { 1 } else { -1 }
    }

    fn classify_batch(&self, points: &[f64], dim: usize, out: &mut [i8]) {
        debug_assert_eq!(dim, self.0.input_dim());
        let mut scores = [0.0f64; 512];
        let mut done = 0;
        while done < out.len() {
            let take = (out.len() - done).min(512);
            self.0.forward_batch(
                &points[done * dim..(done + take) * dim],
                &mut scores[..take],
            );
            for i in 0..take {
                out[done + i] = if scores[i] >= 0.0 { 1 } else { -1 };
            }
            done += take;
        }
    }
}

/// A boundary-form net: the label is the sign of `x_d - f(x_{-d})`, i.e.
/// the positive class lies above the learned boundary.
pub struct BoundaryNet<'a>(pub &'a MlpParams);

impl Classifier for BoundaryNet<'_> {
    fn classify(&self, point: &[f64]) -> i8 {
        let d = point.len();
        debug_assert_eq!(d - 1, self.0.input_dim());
        let f = self.0.forward(&point[..d - 1]);
        if point[d - 1] - f >= 0.0 { 1 } else { -1 }
    }
}

impl Classifier for LocalizedModel {
    fn classify(&self, point: &[f64]) -> i8 {
        self.predict(point)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    MonteCarlo,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_eval: u64,
    pub method: EvalMethod,
}

/// Chunk size of the deterministic Monte-Carlo protocol.
pub const MC_CHUNK: usize = 16_384;

/// Per-chunk accumulator of the evaluated integrand.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChunkStats {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

/// The chunk index/length plan for an `n`-point evaluation.
pub fn chunk_plan(n: u64) -> Vec<(u64, usize)> {
    let mut plan = Vec::new();
    let mut done = 0u64;
    let mut idx = 0u64;
    while done < n {
        let len = ((n - done) as usize).min(MC_CHUNK);
        plan.push((idx, len));
        done += len as u64;
        idx += 1;
    }
    plan
}

/// One misclassification chunk: labeled draws `(x, y)` from the task and
/// the 0-1 integrand `1{C(x) != y}`. Per-sample draw order is `x1, x2, u`.
pub fn risk_chunk(
    c: &dyn Classifier,
    task: &SyntheticTask,
    seed: u64,
    chunk: u64,
    len: usize,
) -> ChunkStats {
    let mut rng = seeds::rng(seeds::mix(seed, chunk));
    let mut points = Vec::with_capacity(len * 2);
    let mut labels = Vec::with_capacity(len);
    for _ in 0..len {
        let x1: f64 = rng.random();
        let x2: f64 = rng.random();
        points.push(x1);
        points.push(x2);
        let eta = task.eta(&[x1, x2]);
        let u: f64 = rng.random();
        labels.push(if u < eta { 1i8 } else { -1i8 });
    }
    let mut pred = alloc::vec![0i8; len];
    c.classify_batch(&points, 2, &mut pred);
    let mut sum = 0.0;
    for i in 0..len {
        if pred[i] != labels[i] {
            sum += 1.0;
        }
    }
    ChunkStats {
        n: len as u64,
        sum,
        sum_sq: sum, // 0/1 integrand
    }
}

/// One excess-risk chunk over unlabeled uniform draws: the integrand is
/// `|2 eta(x) - 1| * 1{C(x) != bayes(x)}`, whose mean is the exact 0-1
/// excess risk.
pub fn excess_chunk(
    c: &dyn Classifier,
    task: &SyntheticTask,
    seed: u64,
    chunk: u64,
    len: usize,
) -> ChunkStats {
    let mut rng = seeds::rng(seeds::mix(seed, chunk));
    let mut points = Vec::with_capacity(len * 2);
    for _ in 0..len {
        points.push(rng.random::<f64>());
        points.push(rng.random::<f64>());
    }
    let mut pred = alloc::vec![0i8; len];
    c.classify_batch(&points, 2, &mut pred);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..len {
        let p = &points[i * 2..i * 2 + 2];
        if pred[i] != synth::bayes_label(p) {
            let v = task.posterior_gap(p).abs();
            sum += v;
            sum_sq += v * v;
        }
    }
    ChunkStats {
        n: len as u64,
        sum,
        sum_sq,
    }
}

/// Combines per-chunk stats (in chunk order) into a mean and standard
/// error, with pairwise summation in index order.
pub fn combine_chunks(stats: &[ChunkStats]) -> RiskEstimate {
    let n: u64 = stats.iter().map(|s| s.n).sum();
    let sums: Vec<f64> = stats.iter().map(|s| s.sum).collect();
    let sumsqs: Vec<f64> = stats.iter().map(|s| s.sum_sq).collect();
    let total = quad::pairwise_sum(&sums);
    let total_sq = quad::pairwise_sum(&sumsqs);
    let nf = n as f64;
    let mean = total / nf;
    let var = ((total_sq - nf * mean * mean) / (nf - 1.0).max(1.0)).max(0.0);
    RiskEstimate {
        value: mean,
        std_error: libm::sqrt(var / nf),
        n_eval: n,
        method: EvalMethod::MonteCarlo,
    }
}

/// Monte-Carlo estimate of `P(C(x) != y)` with binomial standard error;
/// deterministic given the seed.
pub fn misclassification_risk(
    c: &dyn Classifier,
    task: &SyntheticTask,
    n_test: u64,
    seed: u64,
) -> Result<RiskEstimate> {
    if n_test == 0 {
        return Err(Error::EmptyData);
    }
    let stats: Vec<ChunkStats> = chunk_plan(n_test)
        .into_iter()
        .map(|(idx, len)| risk_chunk(c, task, seed, idx, len))
        .collect();
    Ok(combine_chunks(&stats))
}

/// Monte-Carlo estimate of the exact 0-1 excess risk
/// `E[|2 eta - 1| 1{C != bayes}]` over uniform `x` (variance-reduced
/// against label-sampled differencing).
pub fn excess_risk_mc(
    c: &dyn Classifier,
    task: &SyntheticTask,
    n_eval: u64,
    seed: u64,
) -> Result<RiskEstimate> {
    if n_eval == 0 {
        return Err(Error::EmptyData);
    }
    let stats: Vec<ChunkStats> = chunk_plan(n_eval)
        .into_iter()
        .map(|(idx, len)| excess_chunk(c, task, seed, idx, len))
        .collect();
    Ok(combine_chunks(&stats))
}

/// Exact-oracle excess risk of a boundary-form classifier by quadrature:
/// half the density-gap measure of the symmetric difference with the true
/// boundary.
pub fn excess_risk_quadrature(
    boundary: &dyn Fn(f64) -> f64,
    task: &SyntheticTask,
    panels: usize,
) -> f64 {
    let fstar = |x1: f64| synth::boundary_value(x1);
    theory::symdiff_density_gap(boundary, &fstar, task, panels) / 2.0
}

/// Accuracy/risk/excess summary against the task's Bayes reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    pub accuracy: f64,
    pub risk: f64,
    pub excess_risk: f64,
    pub bayes_risk: f64,
    pub n_eval: u64,
    /// Standard error of the excess-risk estimate (the accuracy standard
    /// error is binomial and reconstructible from `accuracy` and `n_eval`).
    pub std_error: f64,
    pub method: EvalMethod,
}

impl RiskReport {
    pub fn from_estimates(risk: &RiskEstimate, excess: &RiskEstimate, bayes_risk: f64) -> Self {
        RiskReport {
            accuracy: 1.0 - risk.value,
            risk: risk.value,
            excess_risk: excess.value,
            bayes_risk,
            n_eval: risk.n_eval,
            std_error: excess.std_error,
            method: risk.method,
        }
    }
}

/// Ordinary least squares on `(log n, log excess)`; the caller must clamp
/// noise-floor values first.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::FitDomain(alloc::format!(
            "need >= 2 points, got {}",
            points.len()
        )));
    }
    let mut lx = Vec::with_capacity(points.len());
    let mut ly = Vec::with_capacity(points.len());
    for &(n, excess) in points {
        if !(n > 0.0 && excess > 0.0) {
            return Err(Error::FitDomain(alloc::format!(
                "nonpositive point ({n}, {excess})"
            )));
        }
        lx.push(libm::log(n));
        ly.push(libm::log(excess));
    }
    fit::fit_line(&lx, &ly)
}

/// Empirical accuracy of a classifier on a labeled dataset.
pub fn dataset_accuracy(c: &dyn Classifier, data: &Dataset) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let correct = data
        .iter()
        .filter(|s| c.classify(s.point) == s.label)
        .count();
    correct as f64 / data.len() as f64
}
