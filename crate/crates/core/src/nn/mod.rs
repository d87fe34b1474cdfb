//! Dense layers, losses, optimizers and backpropagation.
//!
//! Everything is generic over [`Real`]: models train in `f32`, and the same
//! code runs in `f64` for finite-difference gradient checks.

mod layer;
mod loss;
mod optim;
mod spec;

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, ToPrimitive};

pub use layer::{backward, forward, glorot_uniform, Activation, DenseLayer, LayerGrad};
pub use loss::mse_loss;
pub use optim::{Optimizer, OptimizerKind};
pub use spec::NetworkSpec;

/// Floating-point element type of every trainable tensor.
pub trait Real:
    Float
    + LinalgScalar
    + ScalarOperand
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite conversion")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
