//! Analytic gradients of the batch MSE loss.
//!
//! Through a generative layer the partial derivatives are
//! `dx(m)/dw(r,q) = y(m*S + r)^q` and `dx/dy(n) = sum q * w(r,q) * y(n)^(q-1)`,
//! chained through tanh (`1 - y^2`) and the loss.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::layers::FeatureMap;
use crate::model::network::{GradientSet, ModelParameters};
use crate::real::Real;
use crate::train::loss::squared_error;

/// Mean loss and its gradient over a batch.
///
/// Per-item gradients are computed in parallel and summed in batch order, so
/// the result does not depend on the thread count.
pub fn model_backward<T: Real, X: AsRef<[T]> + Sync>(
    params: &ModelParameters<T>,
    inputs: &[X],
    targets: &[Vec<T>],
) -> Result<(f64, GradientSet<T>)> {
    if inputs.len() != targets.len() || inputs.is_empty() {
        return Err(Error::Shape(format!(
            "{} inputs vs {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    let classes = params.config.output_classes;
    if let Some(t) = targets.iter().find(|t| t.len() != classes) {
        return Err(Error::Shape(format!(
            "target has {} entries, model has {classes} outputs",
            t.len()
        )));
    }
    // d(mean)/d(pred) = 2 (pred - target) / (batch * classes)
    let scale = T::from_f64(2.0 / (inputs.len() * classes) as f64);

    let per_item: Vec<(f64, GradientSet<T>)> = inputs
        .par_iter()
        .zip(targets.par_iter())
        .map(|(x, t)| item_backward(params, x.as_ref(), t, scale))
        .collect::<Result<_>>()?;

    let mut total = params.zeros_like();
    let mut sq = 0.0;
    for (s, g) in &per_item {
        sq += s;
        accumulate(&mut total, g);
    }
    Ok((sq / (inputs.len() * classes) as f64, total))
}

/// Mean loss over a batch using the forward pass only.
pub fn batch_loss<T: Real, X: AsRef<[T]> + Sync>(
    params: &ModelParameters<T>,
    inputs: &[X],
    targets: &[Vec<T>],
) -> Result<f64> {
    if inputs.len() != targets.len() || inputs.is_empty() {
        return Err(Error::Shape(format!(
            "{} inputs vs {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    let per_item: Vec<f64> = inputs
        .par_iter()
        .zip(targets.par_iter())
        .map(|(x, t)| {
            let out = params.forward(x.as_ref())?;
            if out.len() != t.len() {
                return Err(Error::Shape("target/output size mismatch".into()));
            }
            Ok(squared_error(&out, t))
        })
        .collect::<Result<_>>()?;
    let count = inputs.len() * params.config.output_classes;
    Ok(per_item.iter().sum::<f64>() / count as f64)
}

/// `total += g`, block by block.
pub fn accumulate<T: Real>(total: &mut GradientSet<T>, g: &GradientSet<T>) {
    for (dst, src) in total.blocks_mut().into_iter().zip(g.blocks()) {
        for (d, &s) in dst.iter_mut().zip(src) {
            *d += s;
        }
    }
}

/// `g * (1 - y^2)`: gradient through tanh given its output `y`.
#[inline]
fn through_tanh<T: Real>(g: T, y: T) -> T {
    g * (T::one() - y * y)
}

fn item_backward<T: Real>(
    params: &ModelParameters<T>,
    input: &[T],
    target: &[T],
    scale: T,
) -> Result<(f64, GradientSet<T>)> {
    let trace = params.forward_trace(input)?;
    let mut grad = params.zeros_like();
    let out = &trace.outputs;

    let delta_out: Vec<T> = out
        .iter()
        .zip(target)
        .map(|(&o, &t)| through_tanh(scale * (o - t), o))
        .collect();
    let g_hidden = params
        .output
        .backward(&trace.output_cache, &delta_out, &mut grad.output, true)?
        .expect("input gradient requested");

    let delta_dense: Vec<T> = g_hidden
        .iter()
        .zip(&trace.dense_output)
        .map(|(&g, &y)| through_tanh(g, y))
        .collect();
    let want_flat = !params.op_layers.is_empty();
    let g_flat =
        params
            .dense
            .backward(&trace.dense_cache, &delta_dense, &mut grad.dense, want_flat)?;

    if let Some(g_flat) = g_flat {
        let last = trace.conv_outputs.last().unwrap();
        let mut g = FeatureMap::from_values(last.channels, last.length, g_flat)?;
        for l in (0..params.op_layers.len()).rev() {
            let y = &trace.conv_outputs[l];
            let delta = FeatureMap {
                channels: y.channels,
                length: y.length,
                values: g
                    .values
                    .iter()
                    .zip(&y.values)
                    .map(|(&g, &y)| through_tanh(g, y))
                    .collect(),
            };
            let layer = &params.op_layers[l];
            match layer.backward(&trace.conv_caches[l], &delta, &mut grad.op_layers[l], l > 0)? {
                Some(prev) => g = prev,
                None => break,
            }
        }
    }
    Ok((squared_error(out, target), grad))
}
