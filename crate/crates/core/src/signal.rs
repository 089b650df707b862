//! Segmentation of raw recordings into fixed-length windows and per-window
//! min-max normalization to `[-1, 1]`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::manifest::ManifestEntry;
use crate::real::Real;
use crate::{SAMPLE_RATE_HZ, SEGMENT_LEN};

/// A raw single-channel recording in arbitrary physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub samples: Vec<f32>,
    pub sample_rate_hz: u32,
}

impl Recording {
    pub fn new(samples: Vec<f32>) -> Self {
        Self {
            samples,
            sample_rate_hz: SAMPLE_RATE_HZ,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

/// Bearing condition. `Faulty` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Healthy,
    Faulty,
}

impl Label {
    pub fn is_faulty(self) -> bool {
        matches!(self, Label::Faulty)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Healthy => "healthy",
            Label::Faulty => "faulty",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "healthy" => Ok(Label::Healthy),
            "faulty" => Ok(Label::Faulty),
            other => Err(format!("unknown label '{other}'")),
        }
    }
}

/// Where a segment came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMeta {
    pub source: Arc<ManifestEntry>,
    pub window_index: usize,
}

impl SegmentMeta {
    /// Stable identity of the segment: (file, window index).
    pub fn id(&self) -> (&str, usize) {
        (self.source.file_path.as_str(), self.window_index)
    }
}

/// One normalized one-second window.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub values: Vec<f32>,
    pub label: Label,
    pub meta: SegmentMeta,
}

impl Segment {
    /// Normalizes `window` and attaches label and provenance.
    pub fn from_window(window: &[f32], label: Label, meta: SegmentMeta) -> Self {
        Self {
            values: normalize_segment(window),
            label,
            meta,
        }
    }
}

/// Splits `samples` into consecutive non-overlapping windows of `window` samples.
/// A trailing remainder shorter than one window is dropped.
///
/// # Panics
///
/// Panics if `window == 0`.
pub fn segment_recording(samples: &[f32], window: usize) -> Vec<&[f32]> {
    assert!(window > 0, "window length must be positive");
    samples.chunks_exact(window).collect()
}

/// [`segment_recording`] with the standard one-second window.
pub fn segment_seconds(rec: &Recording) -> Vec<&[f32]> {
    segment_recording(&rec.samples, SEGMENT_LEN)
}

/// Linear map of `window` onto `[-1, 1]` with the window minimum at `-1` and the
/// maximum at `1`. A constant window maps to all zeros.
pub fn normalize_segment<T: Real>(window: &[T]) -> Vec<T> {
    let Some(&first) = window.first() else {
        return Vec::new();
    };
    let (min, max) = window
        .iter()
        .fold((first, first), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let range = max - min;
    if range == T::zero() || !range.is_finite() {
        return vec![T::zero(); window.len()];
    }
    let two = T::one() + T::one();
    window
        .iter()
        .map(|&x| two * (x - min) / range - T::one())
        .collect()
}
