use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Real;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    pub fn apply<T: Real>(self, x: &mut Array2<T>) {
        if self == Activation::Relu {
            x.mapv_inplace(|v| if v > T::zero() { v } else { T::zero() });
        }
    }

    /// Multiplies `grad` by the activation derivative, evaluated from the
    /// layer's output.
    pub fn backprop<T: Real>(self, output: &Array2<T>, grad: &mut Array2<T>) {
        if self == Activation::Relu {
            grad.zip_mut_with(output, |g, &o| {
                if o <= T::zero() {
                    *g = T::zero();
                }
            });
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Linear => 1,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Linear),
            _ => None,
        }
    }
}

/// `y = act(x W + b)` with `W` stored `[in x out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T> {
    pub weights: Array2<T>,
    pub bias: Array1<T>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad<T> {
    pub weights: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Real> DenseLayer<T> {
    pub fn new(weights: Array2<T>, bias: Array1<T>, activation: Activation) -> Result<Self> {
        if weights.ncols() != bias.len() {
            return Err(Error::Shape(format!(
                "weights {:?} incompatible with bias of length {}",
                weights.dim(),
                bias.len()
            )));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot(input: usize, output: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        Self {
            weights: glorot_uniform(input, output, rng),
            bias: Array1::zeros(output),
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn cast<U: Real>(&self) -> DenseLayer<U> {
        DenseLayer {
            weights: self.weights.mapv(|v| U::from_f64_lossy(v.to_f64_lossy())),
            bias: self.bias.mapv(|v| U::from_f64_lossy(v.to_f64_lossy())),
            activation: self.activation,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(self.bias.iter()).all(|v| v.is_finite())
    }
}

pub fn glorot_uniform<T: Real>(input: usize, output: usize, rng: &mut impl Rng) -> Array2<T> {
    let limit = (6.0 / (input + output) as f64).sqrt();
    Array2::from_shape_simple_fn((input, output), || {
        T::from_f64_lossy(rng.random_range(-limit..limit))
    })
}

/// Runs `x` through `layers`. The result holds the input followed by every
/// layer's output, so the last entry is the network output.
pub fn forward<T: Real>(layers: &[DenseLayer<T>], x: ArrayView2<'_, T>) -> Result<Vec<Array2<T>>> {
    let mut acts = Vec::with_capacity(layers.len() + 1);
    acts.push(x.to_owned());
    for (l, layer) in layers.iter().enumerate() {
        let input = acts.last().unwrap();
        if input.ncols() != layer.input_dim() {
            return Err(Error::Shape(format!(
                "layer {l} expects {} inputs, got {}",
                layer.input_dim(),
                input.ncols()
            )));
        }
        let mut out = input.dot(&layer.weights);
        out += &layer.bias;
        layer.activation.apply(&mut out);
        acts.push(out);
    }
    Ok(acts)
}

/// Backpropagates `out_grad` (gradient w.r.t. the network output) through a
/// cached forward pass. Returns per-layer parameter gradients and the
/// gradient w.r.t. the input.
pub fn backward<T: Real>(
    layers: &[DenseLayer<T>],
    activations: &[Array2<T>],
    out_grad: ArrayView2<'_, T>,
) -> Result<(Vec<LayerGrad<T>>, Array2<T>)> {
    check_cache(layers, activations)?;
    let out = activations.last().unwrap();
    if out_grad.dim() != out.dim() {
        return Err(Error::Shape(format!(
            "output gradient {:?} does not match output {:?}",
            out_grad.dim(),
            out.dim()
        )));
    }
    let mut grads = Vec::with_capacity(layers.len());
    let mut delta = out_grad.to_owned();
    for (l, layer) in layers.iter().enumerate().rev() {
        layer.activation.backprop(&activations[l + 1], &mut delta);
        let weights = activations[l].t().dot(&delta);
        let bias = delta.sum_axis(Axis(0));
        let next = delta.dot(&layer.weights.t());
        grads.push(LayerGrad { weights, bias });
        delta = next;
    }
    grads.reverse();
    Ok((grads, delta))
}

fn check_cache<T: Real>(layers: &[DenseLayer<T>], activations: &[Array2<T>]) -> Result<()> {
    let stale = || Error::InvalidArgument("activation cache does not belong to these layers".into());
    if activations.len() != layers.len() + 1 {
        return Err(stale());
    }
    let rows = activations[0].nrows();
    for (l, layer) in layers.iter().enumerate() {
        if activations[l].ncols() != layer.input_dim()
            || activations[l + 1].ncols() != layer.output_dim()
            || activations[l + 1].nrows() != rows
        {
            return Err(stale());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn identity_layer(n: usize, act: Activation) -> DenseLayer<f64> {
        DenseLayer::new(Array2::eye(n), Array1::zeros(n), act).unwrap()
    }

    #[test]
    fn identity_linear_is_passthrough() {
        let x = array![[1.0, -2.0], [3.5, 0.0]];
        let acts = forward(&[identity_layer(2, Activation::Linear)], x.view()).unwrap();
        assert_eq!(acts.last().unwrap(), &x);
    }

    #[test]
    fn relu_clamps_negatives() {
        let x = array![[-1.0, 2.0]];
        let acts = forward(&[identity_layer(2, Activation::Relu)], x.view()).unwrap();
        assert_eq!(acts[1], array![[0.0, 2.0]]);
    }

    #[test]
    fn relu_idempotent() {
        let mut x = array![[-1.0f64, 0.0, 3.0], [2.0, -0.5, 1e-9]];
        Activation::Relu.apply(&mut x);
        let once = x.clone();
        Activation::Relu.apply(&mut x);
        assert_eq!(x, once);
    }

    #[test]
    fn two_layer_matches_hand_product() {
        let mut rng = stream(3, Stream::Init);
        let l1 = DenseLayer::<f64>::glorot(3, 4, Activation::Relu, &mut rng);
        let mut l2 = DenseLayer::<f64>::glorot(4, 2, Activation::Linear, &mut rng);
        l2.bias = array![0.25, -0.5];
        let x = array![[0.3, -1.2, 2.0], [1.0, 0.5, -0.7]];
        let out = forward(&[l1.clone(), l2.clone()], x.view()).unwrap();
        for i in 0..2 {
            let mut hidden = [0.0; 4];
            for (j, h) in hidden.iter_mut().enumerate() {
                let s: f64 = (0..3).map(|k| x[[i, k]] * l1.weights[[k, j]]).sum::<f64>() + l1.bias[j];
                *h = s.max(0.0);
            }
            for j in 0..2 {
                let s: f64 = (0..4).map(|k| hidden[k] * l2.weights[[k, j]]).sum::<f64>() + l2.bias[j];
                assert_abs_diff_eq!(out[2][[i, j]], s, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let x = array![[1.0, 2.0, 3.0]];
        assert!(matches!(
            forward(&[identity_layer(2, Activation::Linear)], x.view()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn single_linear_layer_closed_form() {
        let mut rng = stream(5, Stream::Init);
        let layer = DenseLayer::<f64>::glorot(3, 2, Activation::Linear, &mut rng);
        let x = array![[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]];
        let acts = forward(std::slice::from_ref(&layer), x.view()).unwrap();
        let g = array![[0.1, -0.2], [0.3, 0.4]];
        let (grads, gx) = backward(std::slice::from_ref(&layer), &acts, g.view()).unwrap();
        assert_eq!(grads[0].weights, x.t().dot(&g));
        assert_eq!(grads[0].bias, g.sum_axis(Axis(0)));
        assert_eq!(gx, g.dot(&layer.weights.t()));
    }

    #[test]
    fn zero_out_grad_gives_zero_gradients() {
        let mut rng = stream(9, Stream::Init);
        let layers = vec![
            DenseLayer::<f64>::glorot(3, 5, Activation::Relu, &mut rng),
            DenseLayer::<f64>::glorot(5, 2, Activation::Linear, &mut rng),
        ];
        let x = array![[1.0, 2.0, 3.0]];
        let acts = forward(&layers, x.view()).unwrap();
        let (grads, gx) = backward(&layers, &acts, Array2::zeros((1, 2)).view()).unwrap();
        assert!(grads.iter().all(|g| g.weights.iter().chain(g.bias.iter()).all(|&v| v == 0.0)));
        assert!(gx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stale_cache_rejected() {
        let mut rng = stream(9, Stream::Init);
        let a = vec![DenseLayer::<f64>::glorot(3, 5, Activation::Relu, &mut rng)];
        let b = vec![DenseLayer::<f64>::glorot(3, 4, Activation::Relu, &mut rng)];
        let acts = forward(&a, array![[1.0, 2.0, 3.0]].view()).unwrap();
        assert!(backward(&b, &acts, Array2::zeros((1, 4)).view()).is_err());
    }
}
