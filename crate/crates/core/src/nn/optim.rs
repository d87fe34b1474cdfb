use ndarray::{ArrayD, ArrayViewD, ArrayViewMutD, Zip};
use serde::{Deserialize, Serialize};

use super::Real;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    SgdMomentum {
        learning_rate: f64,
        momentum: f64,
    },
    Adam {
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

impl OptimizerKind {
    pub fn sgd(learning_rate: f64, momentum: f64) -> Self {
        OptimizerKind::SgdMomentum {
            learning_rate,
            momentum,
        }
    }

    pub fn adam(learning_rate: f64) -> Self {
        OptimizerKind::Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            OptimizerKind::SgdMomentum {
                learning_rate,
                momentum,
            } => learning_rate > 0.0 && (0.0..1.0).contains(&momentum),
            OptimizerKind::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
            } => {
                learning_rate > 0.0
                    && (0.0..1.0).contains(&beta1)
                    && (0.0..1.0).contains(&beta2)
                    && epsilon > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("optimizer hyperparameters out of range: {self:?}")))
        }
    }
}

/// Optimizer plus its per-parameter slot buffers (velocity for SGD, first
/// and second moments for Adam). Slots are created on the first step and
/// must keep matching the parameter shapes afterwards.
#[derive(Debug, Clone)]
pub struct Optimizer<T> {
    kind: OptimizerKind,
    first: Vec<ArrayD<T>>,
    second: Vec<ArrayD<T>>,
    steps: u64,
}

impl<T: Real> Optimizer<T> {
    pub fn new(kind: OptimizerKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self {
            kind,
            first: Vec::new(),
            second: Vec::new(),
            steps: 0,
        })
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one update. If any gradient is non-finite nothing is changed
    /// and an error is returned.
    pub fn step(&mut self, params: &mut [ArrayViewMutD<'_, T>], grads: &[ArrayViewD<'_, T>]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::Shape(format!(
                "{} parameters but {} gradients",
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != g.shape() {
                return Err(Error::Shape(format!(
                    "parameter {i} has shape {:?}, gradient {:?}",
                    p.shape(),
                    g.shape()
                )));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient { param: i });
            }
        }
        if self.first.is_empty() {
            self.first = grads.iter().map(|g| ArrayD::zeros(g.raw_dim())).collect();
            if matches!(self.kind, OptimizerKind::Adam { .. }) {
                self.second = grads.iter().map(|g| ArrayD::zeros(g.raw_dim())).collect();
            }
        } else if self.first.len() != params.len()
            || self.first.iter().zip(params.iter()).any(|(s, p)| s.shape() != p.shape())
        {
            return Err(Error::Shape("optimizer slots do not match parameters".into()));
        }
        self.steps += 1;
        match self.kind {
            OptimizerKind::SgdMomentum {
                learning_rate,
                momentum,
            } => {
                let lr = T::from_f64_lossy(learning_rate);
                let mu = T::from_f64_lossy(momentum);
                for ((p, g), v) in params.iter_mut().zip(grads).zip(&mut self.first) {
                    Zip::from(p).and(g).and(v).for_each(|w, &g, v| {
                        *v = mu * *v - lr * g;
                        *w += *v;
                    });
                }
            }
            OptimizerKind::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
            } => {
                let t = self.steps as i32;
                let c1 = T::from_f64_lossy(1.0 - beta1.powi(t));
                let c2 = T::from_f64_lossy(1.0 - beta2.powi(t));
                let lr = T::from_f64_lossy(learning_rate);
                let (b1, b2) = (T::from_f64_lossy(beta1), T::from_f64_lossy(beta2));
                let eps = T::from_f64_lossy(epsilon);
                let one = T::one();
                for (((p, g), m), v) in params
                    .iter_mut()
                    .zip(grads)
                    .zip(&mut self.first)
                    .zip(&mut self.second)
                {
                    Zip::from(p).and(g).and(m).and(v).for_each(|w, &g, m, v| {
                        *m = b1 * *m + (one - b1) * g;
                        *v = b2 * *v + (one - b2) * g * g;
                        let m_hat = *m / c1;
                        let v_hat = *v / c2;
                        *w -= lr * m_hat / (v_hat.sqrt() + eps);
                    });
                }
            }
        }
        Ok(())
    }
}
