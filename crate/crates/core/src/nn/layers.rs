//! Message-passing layers (GCN / GIN) and the two-layer scoring MLP, each
//! with hand-written forward and backward passes.

use rand::Rng;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, pre: &DenseMatrix) -> DenseMatrix {
        match self {
            Activation::Identity => pre.clone(),
            Activation::Relu => {
                let mut out = pre.clone();
                for v in out.data_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                out
            }
        }
    }

    /// grad wrt pre-activation, given grad wrt output.
    fn backward(self, pre: &DenseMatrix, grad_out: &DenseMatrix) -> DenseMatrix {
        match self {
            Activation::Identity => grad_out.clone(),
            Activation::Relu => {
                let mut g = grad_out.clone();
                for (gv, &p) in g.data_mut().iter_mut().zip(pre.data()) {
                    if p <= 0.0 {
                        *gv = 0.0;
                    }
                }
                g
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Gcn,
    Gin,
}

/// Hyperparameters of one message-passing layer. `gin_eps` is a fixed
/// constant, not a trained parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub in_dim: usize,
    pub out_dim: usize,
    pub gin_eps: f64,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn gcn(in_dim: usize, out_dim: usize) -> Self {
        LayerSpec { kind: LayerKind::Gcn, in_dim, out_dim, gin_eps: 0.0, activation: Activation::Relu }
    }

    pub fn gin(in_dim: usize, out_dim: usize, eps: f64) -> Self {
        LayerSpec { kind: LayerKind::Gin, in_dim, out_dim, gin_eps: eps, activation: Activation::Relu }
    }

    pub fn with_activation(mut self, act: Activation) -> Self {
        self.activation = act;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_dim == 0 || self.out_dim == 0 {
            return Err(Error::Dimension("layer dims must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parameter matrices of one layer. GIN's update MLP keeps its hidden
/// width equal to the output width.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerParams {
    Gcn { w: DenseMatrix, b: DenseMatrix },
    Gin { w1: DenseMatrix, b1: DenseMatrix, w2: DenseMatrix, b2: DenseMatrix },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub spec: LayerSpec,
    pub params: LayerParams,
}

/// Intermediates one layer's backward pass needs.
#[derive(Debug)]
pub enum LayerCache {
    Gcn { agg: DenseMatrix, pre: DenseMatrix },
    Gin { msg: DenseMatrix, h1_pre: DenseMatrix, h1: DenseMatrix, pre: DenseMatrix },
}

/// Gradients, shaped like [`LayerParams`].
pub type LayerGrads = LayerParams;

impl Layer {
    pub fn init<R: Rng>(spec: LayerSpec, rng: &mut R) -> Result<Layer> {
        spec.validate()?;
        let bound_in = 1.0 / (spec.in_dim as f64).sqrt();
        let params = match spec.kind {
            LayerKind::Gcn => {
                let mut w = DenseMatrix::zeros(spec.in_dim, spec.out_dim);
                let mut b = DenseMatrix::zeros(1, spec.out_dim);
                w.fill_uniform(bound_in, rng);
                b.fill_uniform(bound_in, rng);
                LayerParams::Gcn { w, b }
            }
            LayerKind::Gin => {
                let hidden = spec.out_dim;
                let bound_h = 1.0 / (hidden as f64).sqrt();
                let mut w1 = DenseMatrix::zeros(spec.in_dim, hidden);
                let mut b1 = DenseMatrix::zeros(1, hidden);
                let mut w2 = DenseMatrix::zeros(hidden, spec.out_dim);
                let mut b2 = DenseMatrix::zeros(1, spec.out_dim);
                w1.fill_uniform(bound_in, rng);
                b1.fill_uniform(bound_in, rng);
                w2.fill_uniform(bound_h, rng);
                b2.fill_uniform(bound_h, rng);
                LayerParams::Gin { w1, b1, w2, b2 }
            }
        };
        Ok(Layer { spec, params })
    }

    pub fn zero_grads(&self) -> LayerGrads {
        match &self.params {
            LayerParams::Gcn { w, b } => LayerParams::Gcn {
                w: DenseMatrix::zeros(w.rows(), w.cols()),
                b: DenseMatrix::zeros(b.rows(), b.cols()),
            },
            LayerParams::Gin { w1, b1, w2, b2 } => LayerParams::Gin {
                w1: DenseMatrix::zeros(w1.rows(), w1.cols()),
                b1: DenseMatrix::zeros(b1.rows(), b1.cols()),
                w2: DenseMatrix::zeros(w2.rows(), w2.cols()),
                b2: DenseMatrix::zeros(b2.rows(), b2.cols()),
            },
        }
    }

    /// Symmetric-normalized aggregation with implicit self-loops:
    /// out_i = sum over j in {i} ∪ adj(i) of H_j / sqrt((d_i+1)(d_j+1)).
    fn gcn_aggregate(g: &Graph, h: &DenseMatrix) -> DenseMatrix {
        let n = g.num_nodes();
        let mut out = DenseMatrix::zeros(n, h.cols());
        let inv_sqrt: Vec<f64> =
            (0..n).map(|i| 1.0 / ((g.degree(i) + 1) as f64).sqrt()).collect();
        for i in 0..n {
            let self_coef = inv_sqrt[i] * inv_sqrt[i];
            let (row_i, cols) = (h.row(i).to_vec(), h.cols());
            {
                let o = out.row_mut(i);
                for c in 0..cols {
                    o[c] += self_coef * row_i[c];
                }
            }
            for &j in g.neighbors(i) {
                let coef = inv_sqrt[i] * inv_sqrt[j];
                let row_j = h.row(j).to_vec();
                let o = out.row_mut(i);
                for c in 0..cols {
                    o[c] += coef * row_j[c];
                }
            }
        }
        out.debug_check();
        out
    }

    /// GIN message: (1 + eps) * H_i + sum of neighbor rows.
    fn gin_aggregate(g: &Graph, h: &DenseMatrix, eps: f64) -> DenseMatrix {
        let n = g.num_nodes();
        let mut out = DenseMatrix::zeros(n, h.cols());
        for i in 0..n {
            let scaled: Vec<f64> = h.row(i).iter().map(|&v| (1.0 + eps) * v).collect();
            out.row_mut(i).copy_from_slice(&scaled);
            for &j in g.neighbors(i) {
                let row_j = h.row(j).to_vec();
                let o = out.row_mut(i);
                for (c, &v) in row_j.iter().enumerate() {
                    o[c] += v;
                }
            }
        }
        out.debug_check();
        out
    }

    pub fn forward(&self, g: &Graph, h: &DenseMatrix) -> Result<(DenseMatrix, LayerCache)> {
        if h.rows() != g.num_nodes() {
            return Err(Error::Dimension(format!(
                "input rows {} != graph nodes {}",
                h.rows(),
                g.num_nodes()
            )));
        }
        if h.cols() != self.spec.in_dim {
            return Err(Error::Dimension(format!(
                "input width {} != layer in_dim {}",
                h.cols(),
                self.spec.in_dim
            )));
        }
        match &self.params {
            LayerParams::Gcn { w, b } => {
                let agg = Self::gcn_aggregate(g, h);
                let mut pre = agg.matmul(w);
                pre.add_row_broadcast(b);
                let out = self.spec.activation.apply(&pre);
                Ok((out, LayerCache::Gcn { agg, pre }))
            }
            LayerParams::Gin { w1, b1, w2, b2 } => {
                let msg = Self::gin_aggregate(g, h, self.spec.gin_eps);
                let mut h1_pre = msg.matmul(w1);
                h1_pre.add_row_broadcast(b1);
                let h1 = Activation::Relu.apply(&h1_pre);
                let mut pre = h1.matmul(w2);
                pre.add_row_broadcast(b2);
                let out = self.spec.activation.apply(&pre);
                Ok((out, LayerCache::Gin { msg, h1_pre, h1, pre }))
            }
        }
    }

    /// Backpropagates `grad_out`, returning the gradient wrt the layer
    /// input and accumulating parameter gradients into `grads`.
    pub fn backward(
        &self,
        g: &Graph,
        cache: &LayerCache,
        grad_out: &DenseMatrix,
        grads: &mut LayerGrads,
    ) -> DenseMatrix {
        match (&self.params, cache, grads) {
            (LayerParams::Gcn { w, .. }, LayerCache::Gcn { agg, pre }, LayerParams::Gcn { w: gw, b: gb }) => {
                let d_pre = self.spec.activation.backward(pre, grad_out);
                gw.add_assign(&agg.t_matmul(&d_pre));
                gb.add_assign(&d_pre.col_sum());
                let d_agg = d_pre.matmul_t(w);
                // aggregation is symmetric, so its adjoint is itself
                Self::gcn_aggregate(g, &d_agg)
            }
            (
                LayerParams::Gin { w1, w2, .. },
                LayerCache::Gin { msg, h1_pre, h1, pre },
                LayerParams::Gin { w1: gw1, b1: gb1, w2: gw2, b2: gb2 },
            ) => {
                let d_pre = self.spec.activation.backward(pre, grad_out);
                gw2.add_assign(&h1.t_matmul(&d_pre));
                gb2.add_assign(&d_pre.col_sum());
                let d_h1 = d_pre.matmul_t(w2);
                let d_h1_pre = Activation::Relu.backward(h1_pre, &d_h1);
                gw1.add_assign(&msg.t_matmul(&d_h1_pre));
                gb1.add_assign(&d_h1_pre.col_sum());
                let d_msg = d_h1_pre.matmul_t(w1);
                // adjoint of (1+eps)I + A is itself (undirected adjacency)
                Self::gin_aggregate(g, &d_msg, self.spec.gin_eps)
            }
            _ => unreachable!("cache/grads shaped by this layer"),
        }
    }
}

/// One message-passing step without gradient bookkeeping.
pub fn layer_forward(layer: &Layer, g: &Graph, h: &DenseMatrix) -> Result<DenseMatrix> {
    layer.forward(g, h).map(|(out, _)| out)
}

/// Two-layer perceptron ending in a single logit.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub w1: DenseMatrix,
    pub b1: DenseMatrix,
    pub w2: DenseMatrix,
    pub b2: DenseMatrix,
}

#[derive(Debug)]
pub struct MlpCache {
    input: DenseMatrix,
    h1_pre: DenseMatrix,
    h1: DenseMatrix,
}

impl Mlp {
    pub fn init<R: Rng>(in_dim: usize, hidden: usize, rng: &mut R) -> Result<Mlp> {
        if in_dim == 0 || hidden == 0 {
            return Err(Error::Dimension("mlp dims must be >= 1".into()));
        }
        let bound_in = 1.0 / (in_dim as f64).sqrt();
        let bound_h = 1.0 / (hidden as f64).sqrt();
        let mut w1 = DenseMatrix::zeros(in_dim, hidden);
        let mut b1 = DenseMatrix::zeros(1, hidden);
        let mut w2 = DenseMatrix::zeros(hidden, 1);
        let mut b2 = DenseMatrix::zeros(1, 1);
        w1.fill_uniform(bound_in, rng);
        b1.fill_uniform(bound_in, rng);
        w2.fill_uniform(bound_h, rng);
        b2.fill_uniform(bound_h, rng);
        Ok(Mlp { w1, b1, w2, b2 })
    }

    pub fn zero_grads(&self) -> Mlp {
        Mlp {
            w1: DenseMatrix::zeros(self.w1.rows(), self.w1.cols()),
            b1: DenseMatrix::zeros(self.b1.rows(), self.b1.cols()),
            w2: DenseMatrix::zeros(self.w2.rows(), self.w2.cols()),
            b2: DenseMatrix::zeros(self.b2.rows(), self.b2.cols()),
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<(f64, MlpCache)> {
        if input.len() != self.w1.rows() {
            return Err(Error::Dimension(format!(
                "head input {} != expected {}",
                input.len(),
                self.w1.rows()
            )));
        }
        let x = DenseMatrix::from_rows(vec![input.to_vec()])?;
        let mut h1_pre = x.matmul(&self.w1);
        h1_pre.add_row_broadcast(&self.b1);
        let h1 = Activation::Relu.apply(&h1_pre);
        let mut out = h1.matmul(&self.w2);
        out.add_row_broadcast(&self.b2);
        let logit = out.get(0, 0);
        Ok((logit, MlpCache { input: x, h1_pre, h1 }))
    }

    /// Returns the gradient wrt the head input.
    pub fn backward(&self, cache: &MlpCache, d_logit: f64, grads: &mut Mlp) -> Vec<f64> {
        let d_out = DenseMatrix::from_rows(vec![vec![d_logit]]).expect("1x1");
        grads.w2.add_assign(&cache.h1.t_matmul(&d_out));
        grads.b2.add_assign(&d_out.col_sum());
        let d_h1 = d_out.matmul_t(&self.w2);
        let d_h1_pre = Activation::Relu.backward(&cache.h1_pre, &d_h1);
        grads.w1.add_assign(&cache.input.t_matmul(&d_h1_pre));
        grads.b1.add_assign(&d_h1_pre.col_sum());
        d_h1_pre.matmul_t(&self.w1).row(0).to_vec()
    }
}
