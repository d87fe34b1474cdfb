use ndarray::{Array2, ArrayView2, Zip};

use super::Real;
use crate::error::{Error, Result};

/// Mean squared error over all `n * d` entries, and its gradient w.r.t. the
/// reconstruction.
pub fn mse_loss<T: Real>(x: ArrayView2<'_, T>, x_hat: ArrayView2<'_, T>) -> Result<(T, Array2<T>)> {
    if x.dim() != x_hat.dim() {
        return Err(Error::Shape(format!(
            "mse between {:?} and {:?}",
            x.dim(),
            x_hat.dim()
        )));
    }
    let count = T::from_usize(x.len().max(1)).unwrap();
    let mut sum = T::zero();
    Zip::from(&x).and(&x_hat).for_each(|&a, &b| {
        let diff = a - b;
        sum += diff * diff;
    });
    let two = T::one() + T::one();
    let grad = Zip::from(&x)
        .and(&x_hat)
        .map_collect(|&a, &b| two * (b - a) / count);
    Ok((sum / count, grad))
}
