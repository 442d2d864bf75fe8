use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grad::{backward, unroll, LossHead};
use super::{edge_class_ids, WeightKind, WeightSet};
use crate::bp::{log_prior, EdgeWeights, TannerGraph, DEFAULT_CLAMP};
use crate::error::{Error, Result};
use crate::noise::{DepolarizingChannel, ShotSeed};
use crate::pauli::{PauliVector, SparseCheckMatrix};
use crate::scalar::Real;
use crate::toric::{MatrixKind, ToricCode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// Multi-iteration cross-entropy against the sampled error.
    CrossEntropy,
    /// Soft anticommutation of the residual with the stabilizer generators
    /// and logicals; blind to which of two equivalent errors BP picks.
    Commutation,
    /// Cross-entropy plus `commutation_weight` times the commutation loss.
    Combined,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cross-entropy" => Ok(LossKind::CrossEntropy),
            "commutation" => Ok(LossKind::Commutation),
            "combined" => Ok(LossKind::Combined),
            _ => Err(Error::Config(format!("unknown loss '{s}'"))),
        }
    }
}

/// Rows scored by [`LossKind::Commutation`]: standard checks, then logicals.
pub fn normalizer_rows(code: &ToricCode) -> Result<SparseCheckMatrix> {
    let h = code.standard();
    let mut rows: Vec<PauliVector> = (0..h.num_rows()).map(|j| h.row_vector(j)).collect();
    rows.extend(code.logicals().iter().cloned());
    SparseCheckMatrix::from_pauli_vectors(code.num_qubits(), &rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub kind: WeightKind,
    pub iterations: usize,
    /// One set of values reused by every iteration.
    pub shared: bool,
    pub batch_size: usize,
    pub steps: usize,
    pub learning_rate: f64,
    /// Training error rates; shot `b` of a batch uses `epsilons[b % len]`.
    pub epsilons: Vec<f64>,
    pub grad_clip: f64,
    pub seed: u64,
    pub loss: LossKind,
    /// Weight of the commutation term under [`LossKind::Combined`].
    pub commutation_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            kind: WeightKind::Conv,
            iterations: 8,
            shared: false,
            batch_size: 64,
            steps: 2000,
            learning_rate: 0.01,
            epsilons: vec![0.1],
            grad_clip: 10.0,
            seed: 1,
            loss: LossKind::Combined,
            commutation_weight: 10.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.iterations == 0 {
            return bad("iterations must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.grad_clip > 0.0) {
            return bad("grad_clip must be positive");
        }
        if !(self.commutation_weight >= 0.0 && self.commutation_weight.is_finite()) {
            return bad("commutation_weight must be nonnegative");
        }
        if self.epsilons.is_empty() {
            return bad("at least one training epsilon is required");
        }
        for &e in &self.epsilons {
            DepolarizingChannel::new(e)?;
            if e == 0.0 {
                return bad("training epsilon must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LossReport {
    /// Mean batch loss before each update.
    pub losses: Vec<f64>,
    pub checksum: String,
    pub config: TrainConfig,
}

impl LossReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Mean of `losses[range]`.
    pub fn mean(&self, range: std::ops::Range<usize>) -> f64 {
        let s = &self.losses[range];
        s.iter().sum::<f64>() / s.len() as f64
    }
}

/// Loss and per-edge gradient of one error sample.
pub fn loss_and_gradient<T: Real>(
    g: &TannerGraph,
    h: &SparseCheckMatrix,
    channel: &DepolarizingChannel,
    w: &EdgeWeights<T>,
    iterations: usize,
    e: &PauliVector,
    head: &LossHead<'_>,
) -> Result<(T, Vec<T>)> {
    let s = h.syndrome(e)?;
    let lp = log_prior(&channel.prior::<T>(), DEFAULT_CLAMP)?;
    let tr = unroll(g, &lp, &s, w, iterations, DEFAULT_CLAMP)?;
    Ok(backward(g, &tr, &s, w, e, head, DEFAULT_CLAMP))
}

/// Adam with bias correction over the weight values, batch-averaged
/// gradients clipped to `grad_clip` in Euclidean norm.
pub fn train<T: Real>(
    code: &ToricCode,
    matrix: MatrixKind,
    cfg: &TrainConfig,
) -> Result<(WeightSet<T>, LossReport)> {
    cfg.validate()?;
    let mut ws = WeightSet::<T>::init_unit(cfg.kind, cfg.iterations, cfg.shared, code, matrix)?;
    ws.epsilon_train = cfg.epsilons.clone();
    let h = code.matrix(matrix);
    let g = TannerGraph::new(h);
    let classes = match cfg.kind {
        WeightKind::Conv => Some(edge_class_ids(code, matrix)?),
        WeightKind::Dense => None,
    };
    let channels: Vec<DepolarizingChannel> = cfg
        .epsilons
        .iter()
        .map(|&e| DepolarizingChannel::new(e))
        .collect::<Result<_>>()?;
    let normalizer;
    let head = match cfg.loss {
        LossKind::CrossEntropy => LossHead::CrossEntropy,
        LossKind::Commutation => {
            normalizer = normalizer_rows(code)?;
            LossHead::Commutation(&normalizer)
        }
        LossKind::Combined => {
            normalizer = normalizer_rows(code)?;
            LossHead::Combined {
                rows: &normalizer,
                weight: cfg.commutation_weight,
            }
        }
    };
    let n = code.num_qubits();
    let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8f64);
    let mut m = vec![0.0f64; ws.values().len()];
    let mut v = vec![0.0f64; ws.values().len()];
    let mut losses = Vec::with_capacity(cfg.steps);

    for step in 0..cfg.steps {
        let w = ws.bind(code)?;
        let per_shot: Vec<Result<(T, Vec<T>)>> = (0..cfg.batch_size)
            .into_par_iter()
            .map(|b| {
                let ch = &channels[b % channels.len()];
                let seed = ShotSeed::new(cfg.seed, (step * cfg.batch_size + b) as u64);
                let e = ch.sample_error(n, seed);
                loss_and_gradient(&g, h, ch, &w, cfg.iterations, &e, &head)
            })
            .collect();
        let mut loss = 0.0;
        let mut acc = vec![T::zero(); per_shot.first().map_or(0, |r| r.as_ref().map_or(0, |x| x.1.len()))];
        for r in per_shot {
            let (l, gr) = r?;
            loss += l.as_f64();
            for (a, x) in acc.iter_mut().zip(gr) {
                *a = *a + x;
            }
        }
        let bs = cfg.batch_size as f64;
        loss /= bs;
        let grad: Vec<f64> = ws
            .reduce_gradient(&acc, classes.as_deref())
            .into_iter()
            .map(|x| x.as_f64() / bs)
            .collect();
        let norm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !loss.is_finite() || !norm.is_finite() {
            return Err(Error::Diverged { step, loss });
        }
        losses.push(loss);
        let scale = if norm > cfg.grad_clip { cfg.grad_clip / norm } else { 1.0 };
        let t = (step + 1) as i32;
        let (c1, c2) = (1.0 - b1.powi(t), 1.0 - b2.powi(t));
        for (k, x) in ws.values_mut().iter_mut().enumerate() {
            let gk = grad[k] * scale;
            m[k] = b1 * m[k] + (1.0 - b1) * gk;
            v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
            let upd = cfg.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
            *x = T::of(x.as_f64() - upd);
        }
        if step % 100 == 0 {
            log::debug!("step {step}: loss {loss:.6}, |g| {norm:.3e}");
        }
    }
    let report = LossReport {
        losses,
        checksum: ws.checksum(),
        config: cfg.clone(),
    };
    Ok((ws, report))
}
