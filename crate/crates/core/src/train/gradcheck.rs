//! Central finite differences, used to check [`model_backward`](super::model_backward).

use crate::error::Result;
use crate::model::network::{GradientSet, ModelParameters};
use crate::train::backward::batch_loss;

/// `(f(x + h) - f(x - h)) / 2h`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Numerical gradient of the batch MSE loss with respect to every parameter,
/// one central difference per value. Cost is two forward passes per parameter,
/// so this is only practical for small models.
pub fn finite_difference_oracle<X: AsRef<[f64]> + Sync>(
    params: &ModelParameters<f64>,
    inputs: &[X],
    targets: &[Vec<f64>],
    h: f64,
) -> Result<GradientSet<f64>> {
    assert!(h > 0.0, "step must be positive");
    let mut grad = params.zeros_like();
    let mut probe = params.clone();
    let n_blocks = params.blocks().len();
    for b in 0..n_blocks {
        let len = params.blocks()[b].len();
        for i in 0..len {
            let orig = params.blocks()[b][i];
            probe.blocks_mut()[b][i] = orig + h;
            let plus = batch_loss(&probe, inputs, targets)?;
            probe.blocks_mut()[b][i] = orig - h;
            let minus = batch_loss(&probe, inputs, targets)?;
            probe.blocks_mut()[b][i] = orig;
            grad.blocks_mut()[b][i] = (plus - minus) / (2.0 * h);
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let g = central_difference(|w| w * w, 3.0, 1e-5);
        assert!((g - 6.0).abs() < 1e-6);
    }

    #[test]
    fn second_order_convergence() {
        // f = sin has a nonzero third derivative, so the error is ~ h^2 cos(x) / 6.
        let x = 0.7_f64;
        let exact = x.cos();
        let e1 = (central_difference(f64::sin, x, 1e-2) - exact).abs();
        let e2 = (central_difference(f64::sin, x, 5e-3) - exact).abs();
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
