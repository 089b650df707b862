//! Segment classification, metrics, per-sensor reports and latency benchmarking.

pub mod bench;
pub mod metrics;
pub mod report;

use rayon::prelude::*;

pub use bench::{bench_forward, real_time_factor, LatencyStats};
pub use metrics::{
    accumulate_confusion, classify_segment, compute_metrics, f1_score, ConfusionCounts, Metrics,
};
pub use report::{pooled_counts, render_table, report_by_group, GroupKey, MetricsReport};

use crate::error::Result;
use crate::model::network::ModelParameters;
use crate::real::Real;
use crate::signal::{Label, Segment};

/// Network outputs and predicted label for each segment, in input order.
pub fn predict_segments<T: Real>(
    params: &ModelParameters<T>,
    segments: &[Segment],
) -> Result<Vec<(Vec<T>, Label)>> {
    segments
        .par_iter()
        .map(|s| {
            let out = params.forward_segment(s)?;
            let label = classify_segment(&out)?;
            Ok((out, label))
        })
        .collect()
}

/// Fraction of segments classified correctly.
pub fn accuracy<T: Real>(params: &ModelParameters<T>, segments: &[Segment]) -> Result<f64> {
    let preds = predict_segments(params, segments)?;
    let hits = preds
        .iter()
        .zip(segments)
        .filter(|((_, p), s)| *p == s.label)
        .count();
    Ok(hits as f64 / segments.len().max(1) as f64)
}
