use serde::{Deserialize, Serialize};

use super::Activation;
use crate::error::{Error, Result};

/// Layer sizes of an encoder, input first, plus one activation per layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layer_sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    #[serde(default)]
    pub tied_decoder: bool,
}

impl NetworkSpec {
    /// ReLU on every hidden layer, linear on the last.
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        let layers = layer_sizes.len().saturating_sub(1);
        let activations = (0..layers)
            .map(|l| if l + 1 == layers { Activation::Linear } else { Activation::Relu })
            .collect();
        Self::with_activations(layer_sizes, activations)
    }

    pub fn with_activations(layer_sizes: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a network needs at least two layer sizes, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!("layer sizes must be positive: {layer_sizes:?}")));
        }
        if activations.len() != layer_sizes.len() - 1 {
            return Err(Error::InvalidArgument(format!(
                "{} activations for {} layers",
                activations.len(),
                layer_sizes.len() - 1
            )));
        }
        Ok(Self {
            layer_sizes,
            activations,
            tied_decoder: false,
        })
    }

    /// Parses `d:500:500:2000:10`, where the leading `d` stands for the
    /// input dimension. A spec without the leading `d` lists hidden sizes
    /// only and gets `input_dim` prepended.
    pub fn parse(spec: &str, input_dim: usize) -> Result<Self> {
        let mut parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        if parts.first().is_some_and(|p| p.eq_ignore_ascii_case("d")) {
            parts.remove(0);
        }
        let mut sizes = vec![input_dim];
        for p in parts {
            sizes.push(p.parse::<usize>().map_err(|_| {
                Error::InvalidArgument(format!("bad layer spec {spec:?}: {p:?} is not a size"))
            })?);
        }
        Self::new(sizes)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn latent_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// `d:500:500:2000:10` form.
    pub fn describe(&self) -> String {
        let tail: Vec<String> = self.layer_sizes[1..].iter().map(|s| s.to_string()).collect();
        format!("d:{}", tail.join(":"))
    }
}
