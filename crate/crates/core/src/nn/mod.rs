//! Small from-scratch message-passing neural engine: label-embedding
//! inputs, GCN/GIN layers, several readouts, a scalar scoring head,
//! reverse-mode gradients with finite-difference checks, and seeded
//! deterministic training.
//!
//! All math is f64. Forward passes over a frozen model are pure; training
//! mutates one model on one thread.

mod checkpoint;
mod matrix;
mod layers;
mod readout;
mod train;

pub use checkpoint::{load_model, save_model, CHECKPOINT_MAGIC};
pub use layers::{layer_forward, Activation, Layer, LayerGrads, LayerKind, LayerParams, LayerSpec, Mlp};
pub use matrix::DenseMatrix;
pub use readout::{Readout, ReadoutCache};
pub use train::{gae_train, train, Optimizer, TrainConfig, TrainOutcome};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Subgraph};
use crate::labeling::NodeLabels;

/// Everything needed to build a model's parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Embedding table rows; every label must be < this.
    pub num_labels: usize,
    pub embed_dim: usize,
    /// Width of the per-node feature rows appended to the embeddings
    /// (0 when the graphs carry no features).
    pub feature_dim: usize,
    pub layers: Vec<LayerSpec>,
    pub readout: Readout,
    pub head_hidden: usize,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_labels == 0 || self.embed_dim == 0 {
            return Err(Error::Dimension("embedding table must be non-empty".into()));
        }
        if self.layers.is_empty() {
            return Err(Error::Dimension("need at least one layer".into()));
        }
        let mut width = self.embed_dim + self.feature_dim;
        for (i, spec) in self.layers.iter().enumerate() {
            spec.validate()?;
            if spec.in_dim != width {
                return Err(Error::Dimension(format!(
                    "layer {i} expects in_dim {}, chain provides {width}",
                    spec.in_dim
                )));
            }
            width = spec.out_dim;
        }
        self.readout.validate()?;
        if self.head_hidden == 0 {
            return Err(Error::Dimension("head hidden dim must be >= 1".into()));
        }
        Ok(())
    }

    pub fn node_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim)
    }
}

/// Label embedding table, message-passing layers, readout, scoring head.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub cfg: ModelConfig,
    pub embed: DenseMatrix,
    pub layers: Vec<Layer>,
    pub head: Mlp,
}

impl Model {
    /// Fresh model with uniform(-1/sqrt(in), +1/sqrt(in)) layer weights
    /// drawn from the given generator, in declaration order. Embedding
    /// rows are unit-scale uniform(-1, 1): they play the role of input
    /// features, and shrinking them with the table width starves the
    /// product readout of gradient.
    pub fn init<R: Rng>(cfg: ModelConfig, rng: &mut R) -> Result<Model> {
        cfg.validate()?;
        let mut embed = DenseMatrix::zeros(cfg.num_labels, cfg.embed_dim);
        embed.fill_uniform(1.0, rng);
        let layers: Vec<Layer> = cfg
            .layers
            .iter()
            .map(|&spec| Layer::init(spec, rng))
            .collect::<Result<_>>()?;
        let head = Mlp::init(cfg.readout.out_dim(cfg.node_dim()), cfg.head_hidden, rng)?;
        Ok(Model { cfg, embed, layers, head })
    }

    /// Parameter matrices in declaration order (the checkpoint order).
    pub fn param_mats(&self) -> Vec<&DenseMatrix> {
        let mut out = vec![&self.embed];
        for layer in &self.layers {
            match &layer.params {
                LayerParams::Gcn { w, b } => out.extend([w, b]),
                LayerParams::Gin { w1, b1, w2, b2 } => out.extend([w1, b1, w2, b2]),
            }
        }
        out.extend([&self.head.w1, &self.head.b1, &self.head.w2, &self.head.b2]);
        out
    }

    pub fn param_mats_mut(&mut self) -> Vec<&mut DenseMatrix> {
        let mut out = vec![&mut self.embed];
        for layer in &mut self.layers {
            match &mut layer.params {
                LayerParams::Gcn { w, b } => out.extend([w, b]),
                LayerParams::Gin { w1, b1, w2, b2 } => out.extend([w1, b1, w2, b2]),
            }
        }
        out.extend([
            &mut self.head.w1,
            &mut self.head.b1,
            &mut self.head.w2,
            &mut self.head.b2,
        ]);
        out
    }

    pub fn num_params(&self) -> usize {
        self.param_mats().iter().map(|m| m.data().len()).sum()
    }

    pub fn get_param(&self, flat: usize) -> f64 {
        let mut offset = flat;
        for m in self.param_mats() {
            if offset < m.data().len() {
                return m.data()[offset];
            }
            offset -= m.data().len();
        }
        panic!("flat index {flat} out of range");
    }

    pub fn set_param(&mut self, flat: usize, v: f64) {
        let mut offset = flat;
        for m in self.param_mats_mut() {
            if offset < m.data().len() {
                m.data_mut()[offset] = v;
                return;
            }
            offset -= m.data().len();
        }
        panic!("flat index {flat} out of range");
    }
}

/// Gradients shaped exactly like a model's parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub embed: DenseMatrix,
    pub layers: Vec<LayerGrads>,
    pub head: Mlp,
}

impl Gradients {
    pub fn zeros_like(model: &Model) -> Gradients {
        Gradients {
            embed: DenseMatrix::zeros(model.embed.rows(), model.embed.cols()),
            layers: model.layers.iter().map(Layer::zero_grads).collect(),
            head: model.head.zero_grads(),
        }
    }

    pub fn mats(&self) -> Vec<&DenseMatrix> {
        let mut out = vec![&self.embed];
        for g in &self.layers {
            match g {
                LayerParams::Gcn { w, b } => out.extend([w, b]),
                LayerParams::Gin { w1, b1, w2, b2 } => out.extend([w1, b1, w2, b2]),
            }
        }
        out.extend([&self.head.w1, &self.head.b1, &self.head.w2, &self.head.b2]);
        out
    }

    pub fn get_flat(&self, flat: usize) -> f64 {
        let mut offset = flat;
        for m in self.mats() {
            if offset < m.data().len() {
                return m.data()[offset];
            }
            offset -= m.data().len();
        }
        panic!("flat index {flat} out of range");
    }
}

/// A labeled subgraph with its binary target, the unit of training data.
#[derive(Debug, Clone)]
pub struct Example {
    pub sub: Subgraph,
    pub labels: NodeLabels,
    pub target: f64,
}

/// Embedding-table indices each node's input row sums over (one index for
/// scalar labels, two for distance pairs).
fn label_indices(labels: &NodeLabels, num_labels: usize) -> Result<Vec<Vec<usize>>> {
    let check = |v: u64| -> Result<usize> {
        if (v as usize) < num_labels {
            Ok(v as usize)
        } else {
            Err(Error::LabelOutOfRange { label: v, table_size: num_labels })
        }
    };
    match labels {
        NodeLabels::Scalar(vs) => vs.iter().map(|&v| Ok(vec![check(v)?])).collect(),
        NodeLabels::Pairs(vs) => vs
            .iter()
            .map(|&(a, b)| Ok(vec![check(a as u64)?, check(b as u64)?]))
            .collect(),
    }
}

/// Builds the input matrix for a graph: row i is the (summed) embedding of
/// node i's label(s) with the node's feature row appended.
pub fn build_input_for_graph(
    model: &Model,
    g: &Graph,
    labels: &NodeLabels,
) -> Result<(DenseMatrix, Vec<Vec<usize>>)> {
    let n = g.num_nodes();
    if labels.len() != n {
        return Err(Error::Dimension(format!(
            "labels {} != nodes {n}",
            labels.len()
        )));
    }
    if g.feature_dim() != model.cfg.feature_dim {
        return Err(Error::Dimension(format!(
            "graph features {} != model feature_dim {}",
            g.feature_dim(),
            model.cfg.feature_dim
        )));
    }
    let contribs = label_indices(labels, model.cfg.num_labels)?;
    let width = model.cfg.embed_dim + model.cfg.feature_dim;
    let mut x = DenseMatrix::zeros(n, width);
    for i in 0..n {
        let row = x.row_mut(i);
        for &idx in &contribs[i] {
            for (c, &e) in model.embed.row(idx).iter().enumerate() {
                row[c] += e;
            }
        }
        if let Some(feats) = g.features() {
            row[model.cfg.embed_dim..].copy_from_slice(&feats[i]);
        }
    }
    x.debug_check();
    Ok((x, contribs))
}

/// Input rows for a labeled subgraph.
pub fn build_input(model: &Model, sg: &Subgraph, labels: &NodeLabels) -> Result<DenseMatrix> {
    build_input_for_graph(model, &sg.graph, labels).map(|(x, _)| x)
}

/// Everything a backward pass needs from one forward run.
pub struct ForwardCache {
    contribs: Vec<Vec<usize>>,
    layer_caches: Vec<layers::LayerCache>,
    h_final: DenseMatrix,
    readout_cache: ReadoutCache,
    head_cache: layers::MlpCache,
    pub logit: f64,
}

fn sortpool_tie_keys(g: &Graph, labels: &NodeLabels) -> Vec<(u64, usize)> {
    labels
        .as_colors()
        .into_iter()
        .enumerate()
        .map(|(i, c)| (c, g.degree(i)))
        .collect()
}

/// Full scoring pass over one labeled subgraph, keeping intermediates.
pub fn forward_subgraph(model: &Model, sg: &Subgraph, labels: &NodeLabels) -> Result<ForwardCache> {
    let (x, contribs) = build_input_for_graph(model, &sg.graph, labels)?;
    let mut h = x;
    let mut layer_caches = Vec::with_capacity(model.layers.len());
    for layer in &model.layers {
        let (next, cache) = layer.forward(&sg.graph, &h)?;
        layer_caches.push(cache);
        h = next;
    }
    let tie = sortpool_tie_keys(&sg.graph, labels);
    let (r, readout_cache) = model.cfg.readout.forward(&h, &sg.targets, &tie)?;
    let (logit, head_cache) = model.head.forward(&r)?;
    if !logit.is_finite() {
        return Err(Error::NonFinite("logit".into()));
    }
    Ok(ForwardCache { contribs, layer_caches, h_final: h, readout_cache, head_cache, logit })
}

/// Logit for one labeled subgraph.
pub fn score_subgraph(model: &Model, sg: &Subgraph, labels: &NodeLabels) -> Result<f64> {
    forward_subgraph(model, sg, labels).map(|c| c.logit)
}

/// Readout plus head over precomputed final node representations.
pub fn readout_and_score(
    model: &Model,
    sg: &Subgraph,
    labels: &NodeLabels,
    h_final: &DenseMatrix,
) -> Result<f64> {
    let tie = sortpool_tie_keys(&sg.graph, labels);
    let (r, _) = model.cfg.readout.forward(h_final, &sg.targets, &tie)?;
    model.head.forward(&r).map(|(logit, _)| logit)
}

/// Node representations from one whole-graph forward pass (the
/// autoencoder path: no subgraph, no labels beyond a shared constant).
pub fn node_representations(model: &Model, g: &Graph, labels: &NodeLabels) -> Result<DenseMatrix> {
    let (x, _) = build_input_for_graph(model, g, labels)?;
    let mut h = x;
    for layer in &model.layers {
        let (next, _) = layer.forward(g, &h)?;
        h = next;
    }
    Ok(h)
}

/// Scores a node pair from precomputed representations (center readouts
/// only; pooling readouts need a subgraph).
pub fn score_node_pair(model: &Model, h: &DenseMatrix, u: NodeId, v: NodeId) -> Result<f64> {
    let r: Vec<f64> = match model.cfg.readout {
        Readout::CenterHadamard => h.row(u).iter().zip(h.row(v)).map(|(&a, &b)| a * b).collect(),
        Readout::CenterConcat => {
            let mut r = h.row(u).to_vec();
            r.extend_from_slice(h.row(v));
            r
        }
        _ => {
            return Err(Error::InvalidArgument(
                "pairwise scoring needs a center readout".into(),
            ))
        }
    };
    model.head.forward(&r).map(|(logit, _)| logit)
}

/// Whole-graph forward pass with cached intermediates, for the
/// autoencoder path where many pairs share one set of node
/// representations.
pub struct GaeForward {
    contribs: Vec<Vec<usize>>,
    layer_caches: Vec<layers::LayerCache>,
    pub h_final: DenseMatrix,
}

pub fn gae_forward(model: &Model, g: &Graph, labels: &NodeLabels) -> Result<GaeForward> {
    let (x, contribs) = build_input_for_graph(model, g, labels)?;
    let mut h = x;
    let mut layer_caches = Vec::with_capacity(model.layers.len());
    for layer in &model.layers {
        let (next, cache) = layer.forward(g, &h)?;
        layer_caches.push(cache);
        h = next;
    }
    Ok(GaeForward { contribs, layer_caches, h_final: h })
}

/// Summed pairwise binary cross-entropy over `(u, v, target)` triples and
/// its gradients: one shared forward, per-pair head passes, one backward
/// sweep through the layers.
pub fn gae_loss_and_gradients(
    model: &Model,
    g: &Graph,
    labels: &NodeLabels,
    batch: &[(NodeId, NodeId, f64)],
) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let fwd = gae_forward(model, g, labels)?;
    let h = &fwd.h_final;
    let d = h.cols();
    let mut grads = Gradients::zeros_like(model);
    let mut d_h = DenseMatrix::zeros(h.rows(), h.cols());
    let mut loss = 0.0;
    for (bi, &(u, v, target)) in batch.iter().enumerate() {
        let r: Vec<f64> = match model.cfg.readout {
            Readout::CenterHadamard => {
                h.row(u).iter().zip(h.row(v)).map(|(&a, &b)| a * b).collect()
            }
            Readout::CenterConcat => {
                let mut r = h.row(u).to_vec();
                r.extend_from_slice(h.row(v));
                r
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "autoencoder scoring needs a center readout".into(),
                ))
            }
        };
        let (logit, head_cache) = model.head.forward(&r)?;
        let l = bce_with_logits(logit, target);
        if !l.is_finite() {
            return Err(Error::NonFinite(format!("loss at batch index {bi}")));
        }
        loss += l;
        let d_logit = sigmoid(logit) - target;
        let d_r = model.head.backward(&head_cache, d_logit, &mut grads.head);
        match model.cfg.readout {
            Readout::CenterHadamard => {
                let hu = h.row(u).to_vec();
                let hv = h.row(v).to_vec();
                for c in 0..d {
                    *d_h.row_mut(u).get_mut(c).unwrap() += d_r[c] * hv[c];
                    *d_h.row_mut(v).get_mut(c).unwrap() += d_r[c] * hu[c];
                }
            }
            Readout::CenterConcat => {
                for c in 0..d {
                    *d_h.row_mut(u).get_mut(c).unwrap() += d_r[c];
                    *d_h.row_mut(v).get_mut(c).unwrap() += d_r[d + c];
                }
            }
            _ => unreachable!("rejected above"),
        }
    }
    for (i, layer) in model.layers.iter().enumerate().rev() {
        d_h = layer.backward(g, &fwd.layer_caches[i], &d_h, &mut grads.layers[i]);
    }
    let mut embed_grad = DenseMatrix::zeros(grads.embed.rows(), grads.embed.cols());
    for i in 0..g.num_nodes() {
        for &idx in &fwd.contribs[i] {
            let row = embed_grad.row_mut(idx);
            for (c, gr) in row.iter_mut().enumerate() {
                *gr += d_h.get(i, c);
            }
        }
    }
    grads.embed.add_assign(&embed_grad);
    Ok((loss, grads))
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Numerically stable binary cross-entropy on a logit.
pub fn bce_with_logits(logit: f64, target: f64) -> f64 {
    logit.max(0.0) - logit * target + (1.0 + (-logit.abs()).exp()).ln()
}

fn backward_subgraph(
    model: &Model,
    sg: &Subgraph,
    cache: &ForwardCache,
    d_logit: f64,
    grads: &mut Gradients,
) {
    let d_r = model.head.backward(&cache.head_cache, d_logit, &mut grads.head);
    let mut d_h = model
        .cfg
        .readout
        .backward(&cache.h_final, &cache.readout_cache, &d_r);
    for (i, layer) in model.layers.iter().enumerate().rev() {
        d_h = layer.backward(&sg.graph, &cache.layer_caches[i], &d_h, &mut grads.layers[i]);
    }
    // d_h is now the gradient wrt the input rows; route the embedding part
    // into the table (the feature part has no parameters behind it).
    // Summed into a local matrix first so each example contributes one
    // add, keeping batch gradients exactly additive in the examples.
    let mut embed_grad = DenseMatrix::zeros(grads.embed.rows(), grads.embed.cols());
    for i in 0..sg.num_nodes() {
        for &idx in &cache.contribs[i] {
            let row = embed_grad.row_mut(idx);
            for (c, g) in row.iter_mut().enumerate() {
                *g += d_h.get(i, c);
            }
        }
    }
    grads.embed.add_assign(&embed_grad);
}

/// Summed binary cross-entropy over the batch and its gradients.
/// Summation (not averaging) keeps the gradient additive in the examples.
pub fn loss_and_gradients(model: &Model, batch: &[Example]) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let mut grads = Gradients::zeros_like(model);
    let mut loss = 0.0;
    for (bi, ex) in batch.iter().enumerate() {
        let cache = forward_subgraph(model, &ex.sub, &ex.labels)?;
        let l = bce_with_logits(cache.logit, ex.target);
        if !l.is_finite() {
            return Err(Error::NonFinite(format!("loss at batch index {bi}")));
        }
        loss += l;
        let d_logit = sigmoid(cache.logit) - ex.target;
        backward_subgraph(model, &ex.sub, &cache, d_logit, &mut grads);
    }
    Ok((loss, grads))
}

/// Outcome of spot-checking analytic gradients against central finite
/// differences.
#[derive(Debug, Clone, Copy)]
pub struct FdReport {
    pub checked: usize,
    pub passed: usize,
    pub max_rel_err: f64,
}

impl FdReport {
    pub fn pass_fraction(&self) -> f64 {
        if self.checked == 0 {
            1.0
        } else {
            self.passed as f64 / self.checked as f64
        }
    }
}

/// Compares `samples` randomly chosen parameter coordinates against
/// (L(t+d) - L(t-d)) / 2d with d = 1e-5; a coordinate passes when
/// |analytic - numeric| <= 1e-4 * max(|analytic|, |numeric|) + 1e-8.
pub fn finite_difference_check(
    model: &mut Model,
    batch: &[Example],
    samples: usize,
    seed: u64,
) -> Result<FdReport> {
    use rand::SeedableRng;
    let (_, grads) = loss_and_gradients(model, batch)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = model.num_params();
    let delta = 1e-5;
    let mut report = FdReport { checked: 0, passed: 0, max_rel_err: 0.0 };
    for _ in 0..samples {
        let idx = rng.random_range(0..n);
        let orig = model.get_param(idx);
        model.set_param(idx, orig + delta);
        let (l_plus, _) = loss_and_gradients(model, batch)?;
        model.set_param(idx, orig - delta);
        let (l_minus, _) = loss_and_gradients(model, batch)?;
        model.set_param(idx, orig);
        let numeric = (l_plus - l_minus) / (2.0 * delta);
        let analytic = grads.get_flat(idx);
        let err = (analytic - numeric).abs();
        let tol = 1e-4 * analytic.abs().max(numeric.abs()) + 1e-8;
        report.checked += 1;
        if err <= tol {
            report.passed += 1;
        }
        let scale = analytic.abs().max(numeric.abs()).max(1e-12);
        report.max_rel_err = report.max_rel_err.max(err / scale);
    }
    Ok(report)
}
