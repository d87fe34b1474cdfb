//! Graph autoencoder over a text graph.
//!
//! Encoder: stacked GCN layers `H' = act(A_norm H W)` (ReLU hidden, linear
//! output). Decoder: `sigmoid(z_i . z_j)` scored with binary cross-entropy
//! against observed edges and an equal-sized (by default) sample of
//! non-edges, resampled every epoch.

use ndarray::{Array2, ArrayView2, ArrayViewD, ArrayViewMutD};
use rand::Rng;
use serde::Serialize;

use crate::autoencoder::diverged;
use crate::error::{Error, Result};
use crate::graph::{normalize_adjacency, NormalizedAdjacency, TextGraph};
use crate::nn::{glorot_uniform, Activation, NetworkSpec, Optimizer, OptimizerKind, Real};
use crate::rng::{self, stream, Stream};

/// One propagation layer; GCN layers carry no bias.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnLayer<T> {
    pub weights: Array2<T>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaeModel<T> {
    pub spec: NetworkSpec,
    pub layers: Vec<GcnLayer<T>>,
}

impl<T: Real> GaeModel<T> {
    pub fn init(spec: &NetworkSpec, seed: u64) -> Self {
        let mut rng = stream(seed, Stream::Init);
        let layers = spec
            .layer_sizes
            .windows(2)
            .zip(&spec.activations)
            .map(|(w, &activation)| GcnLayer {
                weights: glorot_uniform(w[0], w[1], &mut rng),
                activation,
            })
            .collect();
        Self {
            spec: spec.clone(),
            layers,
        }
    }

    pub fn encode(&self, adj: &NormalizedAdjacency, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        gcn_forward(adj, x, &self.layers)
    }

    pub fn cast<U: Real>(&self) -> GaeModel<U> {
        GaeModel {
            spec: self.spec.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| GcnLayer {
                    weights: l.weights.mapv(|v| U::from_f64_lossy(v.to_f64_lossy())),
                    activation: l.activation,
                })
                .collect(),
        }
    }
}

/// Input followed by every layer's output.
pub fn gcn_forward_cached<T: Real>(
    adj: &NormalizedAdjacency,
    x: ArrayView2<'_, T>,
    layers: &[GcnLayer<T>],
) -> Result<Vec<Array2<T>>> {
    if x.nrows() != adj.n() {
        return Err(Error::Shape(format!("{} feature rows for {} graph nodes", x.nrows(), adj.n())));
    }
    let mut acts = vec![x.to_owned()];
    for (l, layer) in layers.iter().enumerate() {
        let h = acts.last().unwrap();
        if h.ncols() != layer.weights.nrows() {
            return Err(Error::Shape(format!(
                "gcn layer {l} expects {} features, got {}",
                layer.weights.nrows(),
                h.ncols()
            )));
        }
        let mut out = adj.matmul(h.dot(&layer.weights).view())?;
        layer.activation.apply(&mut out);
        acts.push(out);
    }
    Ok(acts)
}

pub fn gcn_forward<T: Real>(
    adj: &NormalizedAdjacency,
    x: ArrayView2<'_, T>,
    layers: &[GcnLayer<T>],
) -> Result<Array2<T>> {
    Ok(gcn_forward_cached(adj, x, layers)?.pop().unwrap())
}

/// Weight gradients and input gradient. Uses the symmetry of `adj`.
pub fn gcn_backward<T: Real>(
    adj: &NormalizedAdjacency,
    layers: &[GcnLayer<T>],
    activations: &[Array2<T>],
    out_grad: ArrayView2<'_, T>,
) -> Result<(Vec<Array2<T>>, Array2<T>)> {
    if activations.len() != layers.len() + 1 || activations.last().unwrap().dim() != out_grad.dim() {
        return Err(Error::InvalidArgument("activation cache does not belong to these layers".into()));
    }
    let mut delta = out_grad.to_owned();
    let mut grads = Vec::with_capacity(layers.len());
    for (l, layer) in layers.iter().enumerate().rev() {
        layer.activation.backprop(&activations[l + 1], &mut delta);
        let spread = adj.matmul(delta.view())?;
        grads.push(activations[l].t().dot(&spread));
        delta = spread.dot(&layer.weights.t());
    }
    grads.reverse();
    Ok((grads, delta))
}

fn softplus<T: Real>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Mean BCE of `sigmoid(z_i . z_j)` against 1 on `positives` and 0 on
/// `negatives`, with its gradient w.r.t. `z`.
pub fn pair_bce_loss<T: Real>(
    z: ArrayView2<'_, T>,
    positives: &[(usize, usize)],
    negatives: &[(usize, usize)],
) -> Result<(T, Array2<T>)> {
    let terms = positives.len() + negatives.len();
    if terms == 0 {
        return Err(Error::EmptyGraph);
    }
    let count = T::from_usize(terms).unwrap();
    let mut loss = T::zero();
    let mut grad = Array2::zeros(z.dim());
    let labeled = positives
        .iter()
        .map(|&p| (p, T::one()))
        .chain(negatives.iter().map(|&p| (p, T::zero())));
    for ((i, j), target) in labeled {
        let zi = z.row(i);
        let zj = z.row(j);
        let logit = zi.dot(&zj);
        loss += if target > T::zero() { softplus(-logit) } else { softplus(logit) };
        let g = (sigmoid(logit) - target) / count;
        let (zi, zj) = (zi.to_owned(), zj.to_owned());
        grad.row_mut(i).scaled_add(g, &zj);
        grad.row_mut(j).scaled_add(g, &zi);
    }
    Ok((loss / count, grad))
}

/// Non-edges drawn uniformly, `round(neg_ratio * |E|)` of them (fewer only
/// when the graph is nearly complete).
pub fn sample_negatives(g: &TextGraph, neg_ratio: f64, rng: &mut rng::Rng) -> Vec<(usize, usize)> {
    let n = g.n();
    let wanted = (neg_ratio * g.num_edges() as f64).round() as usize;
    let available = n * n.saturating_sub(1) / 2 - g.num_edges();
    if wanted == 0 || available == 0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(wanted);
    let mut attempts = 0usize;
    while out.len() < wanted && attempts < 100 * wanted {
        attempts += 1;
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i != j && !g.has_edge(i, j) {
            out.push((i.min(j), i.max(j)));
        }
    }
    out
}

/// Reconstruction loss of the graph from latent `z`; see [`pair_bce_loss`].
pub fn gae_loss<T: Real>(
    z: ArrayView2<'_, T>,
    g: &TextGraph,
    neg_ratio: f64,
    rng: &mut rng::Rng,
) -> Result<(T, Array2<T>)> {
    if !z.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("latent contains non-finite values".into()));
    }
    if g.num_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    if z.nrows() != g.n() {
        return Err(Error::Shape(format!("{} latent rows for {} nodes", z.nrows(), g.n())));
    }
    let negatives = sample_negatives(g, neg_ratio, rng);
    pair_bce_loss(z, g.edges(), &negatives)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaeConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub neg_ratio: f64,
    pub seed: u64,
}

impl Default for GaeConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.002,
            neg_ratio: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaeOutput<T> {
    pub model: GaeModel<T>,
    pub latent: Array2<T>,
    pub history: Vec<f64>,
}

/// Full-batch Adam training on the whole graph.
pub fn train_stn_gae<T: Real>(
    x: ArrayView2<'_, T>,
    g: &TextGraph,
    spec: &NetworkSpec,
    cfg: &GaeConfig,
) -> Result<GaeOutput<T>> {
    if x.ncols() != spec.input_dim() {
        return Err(Error::Shape(format!(
            "spec expects {} features, got {}",
            spec.input_dim(),
            x.ncols()
        )));
    }
    if g.num_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    let adj = normalize_adjacency(g);
    let mut model = GaeModel::init(spec, cfg.seed);
    let mut opt = Optimizer::new(OptimizerKind::adam(cfg.learning_rate))?;
    let mut neg_rng = stream(cfg.seed, Stream::NegSample);
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let acts = gcn_forward_cached(&adj, x, &model.layers)?;
        let z = acts.last().unwrap();
        let negatives = sample_negatives(g, cfg.neg_ratio, &mut neg_rng);
        let (loss, z_grad) = pair_bce_loss(z.view(), g.edges(), &negatives)?;
        let loss = loss.to_f64_lossy();
        if !loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                msg: format!("graph reconstruction loss is {loss}"),
            });
        }
        let (grads, _) = gcn_backward(&adj, &model.layers, &acts, z_grad.view())?;
        let mut params: Vec<ArrayViewMutD<'_, T>> =
            model.layers.iter_mut().map(|l| l.weights.view_mut().into_dyn()).collect();
        let grad_views: Vec<ArrayViewD<'_, T>> = grads.iter().map(|g| g.view().into_dyn()).collect();
        opt.step(&mut params, &grad_views).map_err(|e| diverged(epoch, e))?;
        log::debug!("gae epoch {epoch}: loss {loss:.6}");
        history.push(loss);
    }
    let latent = model.encode(&adj, x)?;
    Ok(GaeOutput {
        model,
        latent,
        history,
    })
}
