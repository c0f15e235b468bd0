use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::argmax_rows;
use super::{HrnModel, TreeBatch};
use crate::error::{Error, Result};
use crate::tree::CodingTree;

/// One depth-canonical tree, its leaf feature rows and its class.
#[derive(Debug, Clone)]
pub struct Sample {
    pub tree: CodingTree,
    pub features: Array2<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// The learning rate is multiplied by `decay` every `decay_every` epochs.
    pub decay_every: usize,
    pub decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 350,
            batch_size: 32,
            lr: 0.01,
            decay_every: 50,
            decay: 0.5,
            seed: 0,
        }
    }
}

/// Learning rate in effect during `epoch` (0-based).
pub fn learning_rate(cfg: &TrainConfig, epoch: usize) -> f64 {
    cfg.lr * cfg.decay.powi((epoch / cfg.decay_every.max(1)) as i32)
}

#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(params: usize) -> Self {
        Adam {
            m: vec![0.0; params],
            v: vec![0.0; params],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub(crate) fn moments(&self) -> (&[f64], &[f64]) {
        (&self.m, &self.v)
    }

    pub(crate) fn from_parts(m: Vec<f64>, v: Vec<f64>, t: i32) -> Self {
        Adam { m, v, t, ..Adam::new(0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
}

pub(crate) fn make_batch(samples: &[Sample], idx: &[usize]) -> Result<TreeBatch> {
    let trees: Vec<&CodingTree> = idx.iter().map(|&i| &samples[i].tree).collect();
    let xs: Vec<&Array2<f64>> = idx.iter().map(|&i| &samples[i].features).collect();
    TreeBatch::new(&trees, &xs)
}

fn accuracy(model: &HrnModel, batch: &TreeBatch, samples: &[Sample], idx: &[usize]) -> Result<f64> {
    let pred = model.predict(batch)?;
    let hits = pred.iter().zip(idx).filter(|(&p, &i)| p == samples[i].label).count();
    Ok(hits as f64 / idx.len() as f64)
}

/// Minibatch Adam on `train_idx`, evaluating `test_idx` after every epoch.
///
/// Batches are reshuffled each epoch; a trailing batch of one tree is
/// folded into the previous batch so batch norm always sees two rows.
pub fn train(model: &mut HrnModel, samples: &[Sample], train_idx: &[usize], test_idx: &[usize], cfg: &TrainConfig) -> Result<Vec<EpochMetrics>> {
    if train_idx.is_empty() {
        return Err(Error::InvalidArgument("empty training fold".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(model.param_count());
    let train_eval = make_batch(samples, train_idx)?;
    let test_eval = if test_idx.is_empty() { None } else { Some(make_batch(samples, test_idx)?) };
    let mut order = train_idx.to_vec();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let lr = learning_rate(cfg, epoch);
        order.shuffle(&mut rng);
        let mut chunks: Vec<&[usize]> = order.chunks(cfg.batch_size).collect();
        if chunks.len() > 1 && chunks[chunks.len() - 1].len() == 1 {
            chunks.pop();
            let n = chunks.len();
            chunks[n - 1] = &order[(n - 1) * cfg.batch_size..];
        }
        let mut loss_sum = 0.0;
        for chunk in chunks {
            let batch = make_batch(samples, chunk)?;
            let labels: Vec<usize> = chunk.iter().map(|&i| samples[i].label).collect();
            let (loss, grads, _) = model.loss_and_gradients(&batch, &labels, Some(&mut rng))?;
            adam.step(model.params_mut(), &grads, lr);
            loss_sum += loss * chunk.len() as f64;
        }
        let test_accuracy = match &test_eval {
            Some(b) => Some(accuracy(model, b, samples, test_idx)?),
            None => None,
        };
        history.push(EpochMetrics {
            epoch,
            lr,
            train_loss: loss_sum / train_idx.len() as f64,
            train_accuracy: accuracy(model, &train_eval, samples, train_idx)?,
            test_accuracy,
        });
    }
    Ok(history)
}

/// Predicted classes for `idx` in eval mode.
pub fn predict(model: &HrnModel, samples: &[Sample], idx: &[usize]) -> Result<Vec<usize>> {
    let batch = make_batch(samples, idx)?;
    Ok(argmax_rows(&model.logits(&batch)?))
}
