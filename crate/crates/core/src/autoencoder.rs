//! Stacked dense autoencoder trained on reconstruction MSE.
//!
//! The encoder realizes `spec.layer_sizes` (e.g. `d:500:500:2000:10`), the
//! decoder the mirrored sizes. Hidden layers use ReLU; the bottleneck and
//! the reconstruction are linear.

use ndarray::{Array2, ArrayView2, ArrayViewD, ArrayViewMutD, Axis};
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nn::{self, Activation, DenseLayer, LayerGrad, NetworkSpec, Optimizer, OptimizerKind, Real};
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderModel<T> {
    pub spec: NetworkSpec,
    pub encoder: Vec<DenseLayer<T>>,
    pub decoder: Vec<DenseLayer<T>>,
}

impl<T: Real> AutoencoderModel<T> {
    /// Glorot-initialized model drawn from the `Init` stream of `seed`.
    pub fn init(spec: &NetworkSpec, seed: u64) -> Result<Self> {
        if spec.latent_dim() >= spec.input_dim() {
            return Err(Error::InvalidArgument(format!(
                "latent dimension {} must be smaller than input dimension {}",
                spec.latent_dim(),
                spec.input_dim()
            )));
        }
        let mut rng = stream(seed, Stream::Init);
        let sizes = &spec.layer_sizes;
        let encoder = sizes
            .windows(2)
            .zip(&spec.activations)
            .map(|(w, &act)| DenseLayer::glorot(w[0], w[1], act, &mut rng))
            .collect();
        let rev: Vec<usize> = sizes.iter().rev().copied().collect();
        let last = rev.len() - 2;
        let decoder = rev
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let act = if l == last { Activation::Linear } else { Activation::Relu };
                DenseLayer::glorot(w[0], w[1], act, &mut rng)
            })
            .collect();
        let mut model = Self {
            spec: spec.clone(),
            encoder,
            decoder,
        };
        model.sync_tied();
        Ok(model)
    }

    pub fn latent_dim(&self) -> usize {
        self.spec.latent_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    /// With tied weights each decoder matrix is the transpose of its mirror
    /// encoder matrix; decoder biases stay independent.
    fn sync_tied(&mut self) {
        if !self.spec.tied_decoder {
            return;
        }
        let n = self.encoder.len();
        for (l, dec) in self.decoder.iter_mut().enumerate() {
            dec.weights = self.encoder[n - 1 - l].weights.t().to_owned();
        }
    }

    pub fn encode(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        check_input(x, self.input_dim())?;
        Ok(nn::forward(&self.encoder, x)?.pop().unwrap())
    }

    pub fn reconstruct(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        let z = self.encode(x)?;
        Ok(nn::forward(&self.decoder, z.view())?.pop().unwrap())
    }

    pub fn reconstruction_loss(&self, x: ArrayView2<'_, T>) -> Result<T> {
        let x_hat = self.reconstruct(x)?;
        Ok(nn::mse_loss(x, x_hat.view())?.0)
    }

    /// Reconstruction loss and gradients for every encoder and decoder layer.
    pub fn loss_and_grads(&self, x: ArrayView2<'_, T>) -> Result<(T, Vec<LayerGrad<T>>, Vec<LayerGrad<T>>)> {
        let enc_acts = nn::forward(&self.encoder, x)?;
        let dec_acts = nn::forward(&self.decoder, enc_acts.last().unwrap().view())?;
        let (loss, grad) = nn::mse_loss(x, dec_acts.last().unwrap().view())?;
        let (dec_grads, z_grad) = nn::backward(&self.decoder, &dec_acts, grad.view())?;
        let (enc_grads, _) = nn::backward(&self.encoder, &enc_acts, z_grad.view())?;
        Ok((loss, enc_grads, dec_grads))
    }

    /// Applies one optimizer step from freshly computed gradients.
    pub(crate) fn apply(
        &mut self,
        opt: &mut Optimizer<T>,
        mut enc_grads: Vec<LayerGrad<T>>,
        dec_grads: Vec<LayerGrad<T>>,
    ) -> Result<()> {
        let tied = self.spec.tied_decoder;
        let n = self.encoder.len();
        if tied {
            for (l, g) in dec_grads.iter().enumerate() {
                enc_grads[n - 1 - l].weights += &g.weights.t();
            }
        }
        let mut params: Vec<ArrayViewMutD<'_, T>> = Vec::new();
        let mut grads: Vec<ArrayViewD<'_, T>> = Vec::new();
        for (layer, g) in self.encoder.iter_mut().zip(&enc_grads) {
            params.push(layer.weights.view_mut().into_dyn());
            params.push(layer.bias.view_mut().into_dyn());
            grads.push(g.weights.view().into_dyn());
            grads.push(g.bias.view().into_dyn());
        }
        for (layer, g) in self.decoder.iter_mut().zip(&dec_grads) {
            if !tied {
                params.push(layer.weights.view_mut().into_dyn());
                grads.push(g.weights.view().into_dyn());
            }
            params.push(layer.bias.view_mut().into_dyn());
            grads.push(g.bias.view().into_dyn());
        }
        opt.step(&mut params, &grads)?;
        drop(params);
        self.sync_tied();
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> AutoencoderModel<U> {
        AutoencoderModel {
            spec: self.spec.clone(),
            encoder: self.encoder.iter().map(DenseLayer::cast).collect(),
            decoder: self.decoder.iter().map(DenseLayer::cast).collect(),
        }
    }
}

pub(crate) fn check_input<T>(x: ArrayView2<'_, T>, d: usize) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::InvalidArgument("input has no rows".into()));
    }
    if x.ncols() != d {
        return Err(Error::Shape(format!("model expects {d} columns, input has {}", x.ncols())));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 15,
            batch_size: 64,
            learning_rate: 0.001,
            seed: 0,
        }
    }
}

/// Shuffled row batches; the last batch may be short.
pub(crate) fn batches(n: usize, batch_size: usize, rng: &mut crate::rng::Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.chunks(batch_size).map(<[usize]>::to_vec).collect()
}

/// Trains with Adam on minibatch MSE. Returns the model and the mean
/// per-entry reconstruction loss of each epoch.
pub fn train_autoencoder<T: Real>(
    x: ArrayView2<'_, T>,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
) -> Result<(AutoencoderModel<T>, Vec<f64>)> {
    let model = AutoencoderModel::init(spec, cfg.seed)?;
    fit_autoencoder(model, x, cfg)
}

/// Continues training an existing model.
pub fn fit_autoencoder<T: Real>(
    mut model: AutoencoderModel<T>,
    x: ArrayView2<'_, T>,
    cfg: &TrainConfig,
) -> Result<(AutoencoderModel<T>, Vec<f64>)> {
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("epochs and batch size must be at least 1".into()));
    }
    check_input(x, model.input_dim())?;
    let mut opt = Optimizer::new(OptimizerKind::adam(cfg.learning_rate))?;
    let mut rng = stream(cfg.seed, Stream::Shuffle);
    let n = x.nrows();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut total = 0.0f64;
        for batch in batches(n, cfg.batch_size, &mut rng) {
            let xb = x.select(Axis(0), &batch);
            let (loss, enc_g, dec_g) = model.loss_and_grads(xb.view())?;
            let loss = loss.to_f64_lossy();
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    msg: format!("reconstruction loss is {loss}"),
                });
            }
            model.apply(&mut opt, enc_g, dec_g).map_err(|e| diverged(epoch, e))?;
            total += loss * batch.len() as f64;
        }
        let mean = total / n as f64;
        log::debug!("autoencoder epoch {epoch}: loss {mean:.6}");
        history.push(mean);
    }
    Ok((model, history))
}

pub(crate) fn diverged(epoch: usize, e: Error) -> Error {
    match e {
        Error::NonFiniteGradient { param } => Error::Diverged {
            epoch,
            msg: format!("non-finite gradient for parameter {param}"),
        },
        other => other,
    }
}

/// Latent codes of `x`.
pub fn encode<T: Real>(model: &AutoencoderModel<T>, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
    model.encode(x)
}
