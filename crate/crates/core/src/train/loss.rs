use crate::error::{Error, Result};
use crate::real::Real;
use crate::signal::Label;

/// Two-unit tanh target: healthy `(+1, -1)`, faulty `(-1, +1)`.
/// Unit 1 is the "faulty" unit.
pub fn encode_target<T: Real>(label: Label) -> [T; 2] {
    match label {
        Label::Healthy => [T::one(), -T::one()],
        Label::Faulty => [-T::one(), T::one()],
    }
}

/// Mean of `(pred - target)^2` over every output of every item.
pub fn mse_loss<T: Real>(preds: &[Vec<T>], targets: &[Vec<T>]) -> Result<f64> {
    if preds.len() != targets.len() || preds.is_empty() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} targets",
            preds.len(),
            targets.len()
        )));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (p, t) in preds.iter().zip(targets) {
        if p.len() != t.len() {
            return Err(Error::Shape(format!(
                "prediction has {} outputs, target has {}",
                p.len(),
                t.len()
            )));
        }
        total += squared_error(p, t);
        count += p.len();
    }
    Ok(total / count as f64)
}

/// Sum of squared differences, accumulated in `f64`.
pub(crate) fn squared_error<T: Real>(pred: &[T], target: &[T]) -> f64 {
    pred.iter()
        .zip(target)
        .map(|(&p, &t)| {
            let d = (p - t).as_f64();
            d * d
        })
        .sum()
}
