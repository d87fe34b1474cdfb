//! Soft-cluster-assignment fine-tuning of a pretrained encoder.
//!
//! Samples are softly assigned to trainable centroids with a Student-t
//! kernel (one degree of freedom). Each epoch the assignments `Q` are
//! sharpened into a target `P`, and the encoder and centroids are updated
//! with SGD-momentum to minimize `KL(P || Q)`. The decoder is not used.

use std::io::Write;

use ndarray::{Array1, Array2, ArrayView2, ArrayViewD, ArrayViewMutD, Axis};
use serde::Serialize;

use crate::autoencoder::{batches, check_input, diverged, AutoencoderModel};
use crate::corpus::LabelVector;
use crate::error::{Error, Result};
use crate::metrics::{clustering_accuracy, kmeans, nmi, KMeansConfig, NmiNormalization};
use crate::nn::{self, DenseLayer, Optimizer, OptimizerKind, Real};
use crate::rng::{stream, Stream};

fn check_centers<T: Real>(z: ArrayView2<'_, T>, u: ArrayView2<'_, T>) -> Result<()> {
    if u.nrows() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 centroids, got {}", u.nrows())));
    }
    if z.ncols() != u.ncols() {
        return Err(Error::Shape(format!(
            "latent has {} columns, centroids {}",
            z.ncols(),
            u.ncols()
        )));
    }
    Ok(())
}

/// Student-t kernel values `1 / (1 + |z_i - u_j|^2)`.
fn kernel<T: Real>(z: ArrayView2<'_, T>, u: ArrayView2<'_, T>) -> Array2<T> {
    Array2::from_shape_fn((z.nrows(), u.nrows()), |(i, j)| {
        let d2 = z
            .row(i)
            .iter()
            .zip(u.row(j))
            .map(|(&a, &b)| (a - b) * (a - b))
            .fold(T::zero(), |s, v| s + v);
        T::one() / (T::one() + d2)
    })
}

fn normalize_rows<T: Real>(mut m: Array2<T>) -> Array2<T> {
    for mut row in m.axis_iter_mut(Axis(0)) {
        let s = row.iter().fold(T::zero(), |a, &b| a + b);
        row /= s;
    }
    m
}

/// `q_ij = (1 + |z_i - u_j|^2)^-1 / sum_j' (1 + |z_i - u_j'|^2)^-1`.
pub fn soft_assign<T: Real>(z: ArrayView2<'_, T>, u: ArrayView2<'_, T>) -> Result<Array2<T>> {
    check_centers(z, u)?;
    Ok(normalize_rows(kernel(z, u)))
}

/// `p_ij` proportional to `q_ij^2 / f_j` with `f_j = sum_i q_ij`.
pub fn target_distribution<T: Real>(q: ArrayView2<'_, T>) -> Array2<T> {
    let freq = q.sum_axis(Axis(0));
    let mut p = q.mapv(|v| v * v);
    p /= &freq;
    normalize_rows(p)
}

/// Soft cluster frequencies `f_j`.
pub fn cluster_frequencies<T: Real>(q: ArrayView2<'_, T>) -> Array1<T> {
    q.sum_axis(Axis(0))
}

/// `sum_ij p_ij ln(p_ij / q_ij)` for row-stochastic `P` and `Q`, and its
/// gradient w.r.t. `q` (P constant).
///
/// Entries are summed as `p ln(p/q) - p + q`, clamped at zero. The extra
/// terms cancel row by row, and the result is never negative.
pub fn kl_loss<T: Real>(p: ArrayView2<'_, T>, q: ArrayView2<'_, T>) -> Result<(T, Array2<T>)> {
    if p.dim() != q.dim() {
        return Err(Error::Shape(format!("P is {:?}, Q is {:?}", p.dim(), q.dim())));
    }
    let mut loss = T::zero();
    for (&pv, &qv) in p.iter().zip(q.iter()) {
        let log_term = if pv > T::zero() { pv * (pv / qv).ln() } else { T::zero() };
        loss += (log_term - pv + qv).max(T::zero());
    }
    let grad = ndarray::Zip::from(&p).and(&q).map_collect(|&pv, &qv| -pv / qv);
    Ok((loss, grad))
}

/// Chains `dL/dQ` back through [`soft_assign`] to the latent codes and the
/// centroids.
pub fn soft_assign_backward<T: Real>(
    z: ArrayView2<'_, T>,
    u: ArrayView2<'_, T>,
    q_grad: ArrayView2<'_, T>,
) -> Result<(Array2<T>, Array2<T>)> {
    check_centers(z, u)?;
    let w = kernel(z, u);
    let q = normalize_rows(w.clone());
    if q_grad.dim() != q.dim() {
        return Err(Error::Shape(format!("dQ is {:?}, Q is {:?}", q_grad.dim(), q.dim())));
    }
    let two = T::one() + T::one();
    let mut z_grad = Array2::zeros(z.dim());
    let mut u_grad = Array2::zeros(u.dim());
    for i in 0..z.nrows() {
        let mean_g = q_grad
            .row(i)
            .iter()
            .zip(q.row(i))
            .fold(T::zero(), |s, (&g, &qv)| s + g * qv);
        for j in 0..u.nrows() {
            // dL/d(|z_i - u_j|^2)
            let c = -w[[i, j]] * q[[i, j]] * (q_grad[[i, j]] - mean_g);
            let diff = &z.row(i) - &u.row(j);
            z_grad.row_mut(i).scaled_add(two * c, &diff);
            u_grad.row_mut(j).scaled_add(-two * c, &diff);
        }
    }
    Ok((z_grad, u_grad))
}

/// Row-wise argmax.
pub fn hard_labels<T: Real>(q: ArrayView2<'_, T>) -> Vec<usize> {
    q.axis_iter(Axis(0))
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop once fewer than this fraction of hard labels change in an epoch.
    pub tol: f64,
    pub kmeans_restarts: usize,
    pub seed: u64,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 64,
            max_epochs: 100,
            tol: 0.001,
            kmeans_restarts: 10,
            seed: 0,
        }
    }
}

/// One line of the fine-tuning log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaEpoch {
    pub epoch: usize,
    /// Full-dataset `KL(P || Q)` per sample at the start of the epoch.
    pub kl_loss: f64,
    pub label_change_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScaOutput<T> {
    pub labels: Vec<usize>,
    pub latent: Array2<T>,
    pub centers: Array2<T>,
    pub encoder: Vec<DenseLayer<T>>,
    /// K-means labels on the pretrained latent, before fine-tuning.
    pub initial_labels: Vec<usize>,
    pub history: Vec<ScaEpoch>,
    pub converged: bool,
    /// Epochs in which some soft cluster frequency dropped below 1.
    pub empty_cluster_epochs: Vec<usize>,
}

impl<T> ScaOutput<T> {
    pub fn write_log(&self, w: &mut impl Write) -> std::io::Result<()> {
        for e in &self.history {
            serde_json::to_writer(&mut *w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn encode<T: Real>(encoder: &[DenseLayer<T>], x: ArrayView2<'_, T>) -> Result<Array2<T>> {
    Ok(nn::forward(encoder, x)?.pop().unwrap())
}

/// Initializes centroids with K-means on the pretrained latent and runs the
/// self-training loop. `truth`, when given, is only used for logging.
pub fn finetune_sca<T: Real>(
    model: &AutoencoderModel<T>,
    x: ArrayView2<'_, T>,
    k: usize,
    cfg: &ScaConfig,
    truth: Option<&LabelVector>,
) -> Result<ScaOutput<T>> {
    check_input(x, model.input_dim())?;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need k >= 2 clusters, got {k}")));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    if let Some(t) = truth {
        if t.len() != x.nrows() {
            return Err(Error::Shape(format!("{} labels for {} samples", t.len(), x.nrows())));
        }
    }
    let n = x.nrows();
    let mut encoder = model.encoder.clone();
    let z0 = encode(&encoder, x)?;
    let km_cfg = KMeansConfig {
        restarts: cfg.kmeans_restarts.max(1),
        ..KMeansConfig::default()
    };
    let init = kmeans(z0.view(), k, &km_cfg, cfg.seed)?;
    let mut centers: Array2<T> = init.centroids.mapv(T::from_f64_lossy);
    let initial_labels = init.labels.clone();
    let mut prev = init.labels;

    let mut opt = Optimizer::new(OptimizerKind::sgd(cfg.learning_rate, cfg.momentum))?;
    let mut rng = stream(cfg.seed, Stream::Shuffle);
    let mut history = Vec::new();
    let mut empty_cluster_epochs = Vec::new();
    let mut converged = false;
    let batch_scale = |len: usize| T::one() / T::from_usize(len).unwrap();

    for epoch in 0..cfg.max_epochs {
        let z = encode(&encoder, x)?;
        let q = soft_assign(z.view(), centers.view())?;
        let p = target_distribution(q.view());
        let labels = hard_labels(q.view());
        let changed = labels.iter().zip(&prev).filter(|(a, b)| a != b).count();
        let change = changed as f64 / n as f64;
        let (kl, _) = kl_loss(p.view(), q.view())?;
        let kl = kl.to_f64_lossy() / n as f64;
        if !kl.is_finite() {
            return Err(Error::Diverged {
                epoch,
                msg: format!("KL loss is {kl}"),
            });
        }
        let (acc, nmi_score) = match truth {
            Some(t) => {
                let pred = LabelVector::new(&labels);
                (
                    Some(clustering_accuracy(t, &pred)?),
                    Some(nmi(t, &pred, NmiNormalization::Geometric)?),
                )
            }
            None => (None, None),
        };
        history.push(ScaEpoch {
            epoch,
            kl_loss: kl,
            label_change_fraction: change,
            acc,
            nmi: nmi_score,
        });
        if epoch > 0 && change < cfg.tol {
            converged = true;
            break;
        }
        let freq = cluster_frequencies(q.view());
        if freq.iter().any(|&f| f < T::one()) {
            log::warn!("epoch {epoch}: a soft cluster has total mass below 1");
            empty_cluster_epochs.push(epoch);
        }
        prev = labels;

        for batch in batches(n, cfg.batch_size, &mut rng) {
            let xb = x.select(Axis(0), &batch);
            let pb = p.select(Axis(0), &batch);
            let acts = nn::forward(&encoder, xb.view())?;
            let zb = acts.last().unwrap();
            let qb = soft_assign(zb.view(), centers.view())?;
            let (_, mut q_grad) = kl_loss(pb.view(), qb.view())?;
            q_grad *= batch_scale(batch.len());
            let (z_grad, u_grad) = soft_assign_backward(zb.view(), centers.view(), q_grad.view())?;
            let (enc_grads, _) = nn::backward(&encoder, &acts, z_grad.view())?;
            let mut params: Vec<ArrayViewMutD<'_, T>> = Vec::new();
            let mut grads: Vec<ArrayViewD<'_, T>> = Vec::new();
            for (layer, g) in encoder.iter_mut().zip(&enc_grads) {
                params.push(layer.weights.view_mut().into_dyn());
                params.push(layer.bias.view_mut().into_dyn());
                grads.push(g.weights.view().into_dyn());
                grads.push(g.bias.view().into_dyn());
            }
            params.push(centers.view_mut().into_dyn());
            grads.push(u_grad.view().into_dyn());
            opt.step(&mut params, &grads).map_err(|e| diverged(epoch, e))?;
        }
    }

    let latent = encode(&encoder, x)?;
    let q = soft_assign(latent.view(), centers.view())?;
    Ok(ScaOutput {
        labels: hard_labels(q.view()),
        latent,
        centers,
        encoder,
        initial_labels,
        history,
        converged,
        empty_cluster_epochs,
    })
}
