//! Single-threaded forward-pass latency.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::network::ModelParameters;
use crate::real::Real;
use crate::signal::normalize_segment;

/// Duration of one segment, the real-time budget for classifying it.
pub const SEGMENT_BUDGET_MS: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub timings: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    /// Segment duration over mean latency.
    pub real_time_factor: f64,
}

impl LatencyStats {
    pub fn from_timings(ms: &[f64]) -> Self {
        assert!(!ms.is_empty(), "no timings");
        let mut sorted = ms.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        // Nearest-rank percentile.
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Self {
            timings: n,
            mean_ms: mean,
            median_ms: median,
            p95_ms: sorted[rank - 1],
            min_ms: sorted[0],
            max_ms: sorted[n - 1],
            real_time_factor: real_time_factor(mean),
        }
    }
}

pub fn real_time_factor(mean_ms: f64) -> f64 {
    SEGMENT_BUDGET_MS / mean_ms
}

/// Deterministic normalized test inputs of `len` samples.
pub fn bench_inputs<T: Real>(n: usize, len: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|k| {
            let raw: Vec<f64> = (0..len)
                .map(|i| {
                    let t = i as f64 / len as f64;
                    (2.0 * std::f64::consts::PI * (17.0 + k as f64) * t).sin()
                        + 0.3 * ((i * 7919 + k * 104_729) % 1000) as f64 / 1000.0
                })
                .collect();
            normalize_segment(&raw)
                .into_iter()
                .map(T::from_f64)
                .collect()
        })
        .collect()
}

/// Times `repetitions` passes over `n_segments` inputs, one forward call at a time
/// on the calling thread.
pub fn bench_forward<T: Real>(
    params: &ModelParameters<T>,
    n_segments: usize,
    repetitions: usize,
) -> Result<LatencyStats> {
    assert!(n_segments >= 1, "need at least one segment");
    let inputs = bench_inputs::<T>(n_segments, params.config.input_length);
    // Warm-up pass, not timed.
    std::hint::black_box(params.forward(&inputs[0])?);
    let mut timings = Vec::with_capacity(n_segments * repetitions.max(1));
    for _ in 0..repetitions.max(1) {
        for x in &inputs {
            let start = Instant::now();
            let out = params.forward(x)?;
            timings.push(start.elapsed().as_secs_f64() * 1e3);
            std::hint::black_box(out);
        }
    }
    Ok(LatencyStats::from_timings(&timings))
}
