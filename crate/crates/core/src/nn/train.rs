//! Seeded, deterministic training loop: gradient descent with momentum by
//! default, an adaptive-moment variant behind a flag.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::matrix::DenseMatrix;
use super::{
    bce_with_logits, gae_forward, gae_loss_and_gradients, loss_and_gradients, score_node_pair,
    score_subgraph, Example, Gradients, Model, ModelConfig,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::labeling::NodeLabels;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    /// Gradient descent with momentum.
    Momentum { momentum: f64 },
    /// Adaptive moments with bias correction.
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Momentum { momentum: 0.9 }
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            learning_rate: 0.01,
            batch_size: 32,
            optimizer: Optimizer::default(),
            seed: 0,
        }
    }
}

#[derive(Debug)]
pub struct TrainOutcome {
    /// Best-validation checkpoint (final parameters when no validation
    /// set was given).
    pub model: Model,
    /// Mean training loss per epoch.
    pub train_losses: Vec<f64>,
    /// Mean validation loss per epoch, when a validation set was given.
    pub valid_losses: Vec<f64>,
    pub best_epoch: usize,
}

struct OptState {
    velocity: Vec<DenseMatrix>,
    second: Vec<DenseMatrix>,
    step: usize,
}

impl OptState {
    fn new(model: &Model) -> OptState {
        let zeros: Vec<DenseMatrix> = model
            .param_mats()
            .iter()
            .map(|m| DenseMatrix::zeros(m.rows(), m.cols()))
            .collect();
        OptState { velocity: zeros.clone(), second: zeros, step: 0 }
    }

    fn apply(&mut self, model: &mut Model, grads: &Gradients, opt: Optimizer, lr: f64) {
        self.step += 1;
        let gmats = grads.mats();
        match opt {
            Optimizer::Momentum { momentum } => {
                for ((param, vel), grad) in model
                    .param_mats_mut()
                    .into_iter()
                    .zip(&mut self.velocity)
                    .zip(gmats)
                {
                    for ((p, v), &g) in param
                        .data_mut()
                        .iter_mut()
                        .zip(vel.data_mut())
                        .zip(grad.data())
                    {
                        *v = momentum * *v - lr * g;
                        *p += *v;
                    }
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let t = self.step as f64;
                let corr1 = 1.0 - beta1.powf(t);
                let corr2 = 1.0 - beta2.powf(t);
                for (((param, m1), m2), grad) in model
                    .param_mats_mut()
                    .into_iter()
                    .zip(&mut self.velocity)
                    .zip(&mut self.second)
                    .zip(gmats)
                {
                    for (((p, m), v), &g) in param
                        .data_mut()
                        .iter_mut()
                        .zip(m1.data_mut())
                        .zip(m2.data_mut())
                        .zip(grad.data())
                    {
                        *m = beta1 * *m + (1.0 - beta1) * g;
                        *v = beta2 * *v + (1.0 - beta2) * g * g;
                        *p -= lr * (*m / corr1) / ((*v / corr2).sqrt() + eps);
                    }
                }
            }
        }
    }
}

fn mean_loss(model: &Model, set: &[Example]) -> Result<f64> {
    let mut total = 0.0;
    for ex in set {
        total += bce_with_logits(score_subgraph(model, &ex.sub, &ex.labels)?, ex.target);
    }
    Ok(total / set.len() as f64)
}

/// Trains a freshly initialized model. Deterministic given the seed:
/// initialization, epoch shuffles, and batch order all come from one
/// seeded generator, and examples are visited in shuffled-index order.
/// Returns the parameters of the best-validation epoch (final epoch when
/// `valid` is empty). Non-finite loss aborts with the failing epoch.
pub fn train(
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
    train_set: &[Example],
    valid: &[Example],
) -> Result<TrainOutcome> {
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = Model::init(model_cfg.clone(), &mut rng)?;
    let mut opt_state = OptState::new(&model);

    let mut train_losses = Vec::with_capacity(cfg.epochs);
    let mut valid_losses = Vec::new();
    let mut best: Option<(f64, Model, usize)> = None;

    let mut indices: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 0..cfg.epochs {
        use rand::seq::SliceRandom;
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in indices.chunks(cfg.batch_size) {
            let batch: Vec<Example> = chunk.iter().map(|&i| train_set[i].clone()).collect();
            let (loss, mut grads) = loss_and_gradients(&model, &batch).map_err(|e| match e {
                Error::NonFinite(msg) => Error::Training { epoch, msg },
                other => other,
            })?;
            if !loss.is_finite() {
                return Err(Error::Training { epoch, msg: "non-finite batch loss".into() });
            }
            epoch_loss += loss;
            // mean-gradient update
            scale_gradients(&mut grads, 1.0 / batch.len() as f64);
            opt_state.apply(&mut model, &grads, cfg.optimizer, cfg.learning_rate);
        }
        train_losses.push(epoch_loss / train_set.len() as f64);

        if !valid.is_empty() {
            let vl = mean_loss(&model, valid)?;
            valid_losses.push(vl);
            let better = best.as_ref().is_none_or(|(b, _, _)| vl < *b);
            if better {
                best = Some((vl, model.clone(), epoch));
            }
        }
    }

    let (model, best_epoch) = match best {
        Some((_, m, e)) => (m, e),
        None => {
            let last = cfg.epochs.saturating_sub(1);
            (model, last)
        }
    };
    Ok(TrainOutcome { model, train_losses, valid_losses, best_epoch })
}

fn scale_gradients(grads: &mut Gradients, scale: f64) {
    grads.embed.scale(scale);
    for g in &mut grads.layers {
        match g {
            super::LayerParams::Gcn { w, b } => {
                w.scale(scale);
                b.scale(scale);
            }
            super::LayerParams::Gin { w1, b1, w2, b2 } => {
                w1.scale(scale);
                b1.scale(scale);
                w2.scale(scale);
                b2.scale(scale);
            }
        }
    }
    grads.head.w1.scale(scale);
    grads.head.b1.scale(scale);
    grads.head.w2.scale(scale);
    grads.head.b2.scale(scale);
}

/// Autoencoder-style training: one whole-graph forward per batch, scoring
/// `(u, v, target)` pairs through a center readout. Deterministic given
/// the seed, like [`train`].
pub fn gae_train(
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
    g: &Graph,
    labels: &NodeLabels,
    train_pairs: &[(NodeId, NodeId, f64)],
    valid_pairs: &[(NodeId, NodeId, f64)],
) -> Result<TrainOutcome> {
    if train_pairs.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = Model::init(model_cfg.clone(), &mut rng)?;
    let mut opt_state = OptState::new(&model);

    let mut train_losses = Vec::with_capacity(cfg.epochs);
    let mut valid_losses = Vec::new();
    let mut best: Option<(f64, Model, usize)> = None;

    let mut indices: Vec<usize> = (0..train_pairs.len()).collect();
    for epoch in 0..cfg.epochs {
        use rand::seq::SliceRandom;
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in indices.chunks(cfg.batch_size) {
            let batch: Vec<(NodeId, NodeId, f64)> =
                chunk.iter().map(|&i| train_pairs[i]).collect();
            let (loss, mut grads) =
                gae_loss_and_gradients(&model, g, labels, &batch).map_err(|e| match e {
                    Error::NonFinite(msg) => Error::Training { epoch, msg },
                    other => other,
                })?;
            if !loss.is_finite() {
                return Err(Error::Training { epoch, msg: "non-finite batch loss".into() });
            }
            epoch_loss += loss;
            scale_gradients(&mut grads, 1.0 / batch.len() as f64);
            opt_state.apply(&mut model, &grads, cfg.optimizer, cfg.learning_rate);
        }
        train_losses.push(epoch_loss / train_pairs.len() as f64);

        if !valid_pairs.is_empty() {
            let fwd = gae_forward(&model, g, labels)?;
            let mut total = 0.0;
            for &(u, v, target) in valid_pairs {
                total += bce_with_logits(score_node_pair(&model, &fwd.h_final, u, v)?, target);
            }
            let vl = total / valid_pairs.len() as f64;
            valid_losses.push(vl);
            let better = best.as_ref().is_none_or(|(b, _, _)| vl < *b);
            if better {
                best = Some((vl, model.clone(), epoch));
            }
        }
    }

    let (model, best_epoch) = match best {
        Some((_, m, e)) => (m, e),
        None => (model, cfg.epochs.saturating_sub(1)),
    };
    Ok(TrainOutcome { model, train_losses, valid_losses, best_epoch })
}
