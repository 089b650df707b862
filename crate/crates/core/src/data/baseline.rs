//! Energy-ratio fault detector: RMS in the resonance band over total RMS,
//! thresholded. A network that cannot beat this has learned nothing useful.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::signal::{Label, Segment};
use crate::SAMPLE_RATE_HZ;

/// Band covering the synthetic defect resonances.
pub const DEFAULT_BAND_HZ: (f64, f64) = (800.0, 2000.0);

pub struct EnergyRatio {
    band_hz: (f64, f64),
    len: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl EnergyRatio {
    pub fn new(len: usize, band_hz: (f64, f64)) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(len);
        Self { band_hz, len, fft }
    }

    /// `sqrt(band energy / total energy)` of the mean-removed signal, in `[0, 1]`.
    pub fn ratio(&self, values: &[f32]) -> f64 {
        assert_eq!(
            values.len(),
            self.len,
            "signal length differs from the planned FFT"
        );
        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64;
        let mut buf: Vec<Complex<f64>> = values
            .iter()
            .map(|&v| Complex::new(v as f64 - mean, 0.0))
            .collect();
        self.fft.process(&mut buf);
        let bin_hz = SAMPLE_RATE_HZ as f64 / self.len as f64;
        let (lo, hi) = self.band_hz;
        let (mut band, mut total) = (0.0, 0.0);
        for (k, c) in buf.iter().enumerate().take(self.len / 2 + 1) {
            let e = c.norm_sqr();
            total += e;
            let f = k as f64 * bin_hz;
            if f >= lo && f <= hi {
                band += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (band / total).sqrt()
        }
    }
}

/// Thresholded [`EnergyRatio`]: ratios above `threshold` are called faulty.
pub struct EnergyRatioDetector {
    pub threshold: f64,
    feature: EnergyRatio,
}

impl EnergyRatioDetector {
    /// Picks the threshold that maximizes accuracy on `segments`.
    pub fn fit(segments: &[Segment], band_hz: (f64, f64)) -> Self {
        let len = segments
            .first()
            .map_or(crate::SEGMENT_LEN, |s| s.values.len());
        let feature = EnergyRatio::new(len, band_hz);
        let mut scored: Vec<(f64, Label)> = segments
            .iter()
            .map(|s| (feature.ratio(&s.values), s.label))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));

        // Threshold below everything: all predicted faulty.
        let faulty_total = scored.iter().filter(|s| s.1.is_faulty()).count();
        let mut correct = faulty_total;
        let mut best = (correct, scored.first().map_or(0.0, |s| s.0 - 1e-12));
        for i in 0..scored.len() {
            // Move item i to the healthy side.
            if scored[i].1.is_faulty() {
                correct -= 1;
            } else {
                correct += 1;
            }
            let thr = match scored.get(i + 1) {
                Some(next) => 0.5 * (scored[i].0 + next.0),
                None => scored[i].0,
            };
            if correct > best.0 {
                best = (correct, thr);
            }
        }
        Self {
            threshold: best.1,
            feature,
        }
    }

    pub fn ratio(&self, segment: &Segment) -> f64 {
        self.feature.ratio(&segment.values)
    }

    pub fn predict(&self, segment: &Segment) -> Label {
        if self.ratio(segment) > self.threshold {
            Label::Faulty
        } else {
            Label::Healthy
        }
    }

    pub fn accuracy(&self, segments: &[Segment]) -> f64 {
        if segments.is_empty() {
            return 0.0;
        }
        let hits = segments
            .iter()
            .filter(|s| self.predict(s) == s.label)
            .count();
        hits as f64 / segments.len() as f64
    }
}
