//! Synthetic bearing signals for desk-scale experiments.
//!
//! A healthy machine is modelled as shaft-rate harmonics plus Gaussian noise. A
//! localized bearing defect adds a train of impacts, each ringing a structural
//! resonance that decays exponentially.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::manifest::{DefectType, Machine, ManifestEntry, SampleFormat, SignalKind};
use crate::error::{Error, Result};
use crate::signal::{Label, Recording};
use crate::SAMPLE_RATE_HZ;

const NYQUIST_HZ: f64 = SAMPLE_RATE_HZ as f64 / 2.0;
/// Impact times deviate from the nominal period by up to this fraction.
const IMPACT_JITTER: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectSpec {
    pub impulse_rate_hz: f64,
    pub impulse_amplitude: f64,
    /// Decay rate of each ringing burst, 1/s.
    pub decay_constant: f64,
    pub resonance_hz: f64,
}

impl Default for DefectSpec {
    fn default() -> Self {
        Self {
            impulse_rate_hz: 60.0,
            impulse_amplitude: 2.0,
            decay_constant: 400.0,
            resonance_hz: 1400.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub duration_s: f64,
    pub rpm: u32,
    pub defect: Option<DefectSpec>,
    pub noise_rms: f64,
    /// Amplitude of the shaft frequency and its integer multiples.
    pub shaft_harmonic_amplitudes: Vec<f64>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            duration_s: 1.0,
            rpm: 1010,
            defect: None,
            noise_rms: 0.3,
            shaft_harmonic_amplitudes: vec![1.0, 0.4, 0.15],
        }
    }
}

impl SynthConfig {
    pub fn shaft_hz(&self) -> f64 {
        self.rpm as f64 / 60.0
    }

    pub fn label(&self) -> Label {
        if self.defect.is_some() {
            Label::Faulty
        } else {
            Label::Healthy
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s >= 1.0) {
            return Err(Error::Config(format!(
                "synthetic duration must be at least 1 s, got {}",
                self.duration_s
            )));
        }
        if self.noise_rms < 0.0 || !self.noise_rms.is_finite() {
            return Err(Error::Config(
                "noise_rms must be a finite non-negative value".into(),
            ));
        }
        let top = self.shaft_hz() * self.shaft_harmonic_amplitudes.len() as f64;
        if top >= NYQUIST_HZ {
            return Err(Error::Config(format!(
                "highest shaft harmonic {top} Hz is not below Nyquist ({NYQUIST_HZ} Hz)"
            )));
        }
        if let Some(d) = &self.defect {
            for (name, v) in [
                ("impulse_rate_hz", d.impulse_rate_hz),
                ("resonance_hz", d.resonance_hz),
            ] {
                if !(v > 0.0 && v < NYQUIST_HZ) {
                    return Err(Error::Config(format!(
                        "{name} = {v} must be in (0, {NYQUIST_HZ}) Hz"
                    )));
                }
            }
            if !(d.decay_constant > 0.0) {
                return Err(Error::Config("decay_constant must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Times (seconds) of the defect impacts in a recording of `cfg`.
pub fn impulse_times(cfg: &SynthConfig) -> Vec<f64> {
    let Some(defect) = &cfg.defect else {
        return Vec::new();
    };
    // Separate stream so impact timing does not shift with noise draws.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1_0000_0001);
    let phase: f64 = rng.gen_range(0.0..1.0);
    let period = 1.0 / defect.impulse_rate_hz;
    let mut times = Vec::new();
    for j in 0.. {
        let jitter = rng.gen_range(-IMPACT_JITTER..=IMPACT_JITTER);
        let t = (j as f64 + phase + jitter) * period;
        if t >= cfg.duration_s {
            break;
        }
        if t >= 0.0 {
            times.push(t);
        }
    }
    times
}

/// Renders the recording described by `cfg`. Identical configs give identical samples.
pub fn generate_synthetic_recording(cfg: &SynthConfig) -> Result<(Recording, Label)> {
    cfg.validate()?;
    let fs = SAMPLE_RATE_HZ as f64;
    let n = (cfg.duration_s * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shaft = cfg.shaft_hz();

    let phases: Vec<f64> = cfg
        .shaft_harmonic_amplitudes
        .iter()
        .map(|_| rng.gen_range(0.0..2.0 * PI))
        .collect();
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            cfg.shaft_harmonic_amplitudes
                .iter()
                .zip(&phases)
                .enumerate()
                .map(|(h, (&a, &ph))| a * (2.0 * PI * (h + 1) as f64 * shaft * t + ph).sin())
                .sum()
        })
        .collect();

    if cfg.noise_rms > 0.0 {
        let normal = Normal::new(0.0, cfg.noise_rms).expect("valid noise level");
        for v in &mut x {
            *v += normal.sample(&mut rng);
        }
    }

    if let Some(d) = &cfg.defect {
        // Ring until the envelope falls below 1e-6 of the impact amplitude.
        let ring_s = (1e6f64).ln() / d.decay_constant;
        for t0 in impulse_times(cfg) {
            let start = (t0 * fs).ceil() as usize;
            let end = (((t0 + ring_s) * fs).ceil() as usize).min(n);
            for (i, v) in x.iter_mut().enumerate().take(end).skip(start) {
                let tau = i as f64 / fs - t0;
                *v += d.impulse_amplitude
                    * (-d.decay_constant * tau).exp()
                    * (2.0 * PI * d.resonance_hz * tau).sin();
            }
        }
    }

    let samples = x.into_iter().map(|v| v as f32).collect();
    Ok((Recording::new(samples), cfg.label()))
}

/// Request for a balanced set of varied synthetic recordings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthCorpusSpec {
    pub n_healthy: usize,
    pub n_faulty: usize,
    pub seed: u64,
    pub duration_s: f64,
    pub machine: Machine,
    pub sensor_id: u8,
    pub signal: SignalKind,
    pub format: SampleFormat,
}

impl Default for SynthCorpusSpec {
    fn default() -> Self {
        Self {
            n_healthy: 20,
            n_faulty: 20,
            seed: 0,
            duration_s: 1.0,
            machine: Machine::A,
            sensor_id: 1,
            signal: SignalKind::Vibration,
            format: SampleFormat::F32le,
        }
    }
}

/// Synthetic recordings paired with the manifest rows describing them.
///
/// Each recording draws its own working condition: a speed from the machine's
/// list, noise level, harmonic mix and, for faulty ones, defect type, size,
/// impact rate (a bearing-like multiple of shaft speed), impact strength,
/// damping and resonance.
pub fn synth_corpus(spec: &SynthCorpusSpec) -> Vec<(ManifestEntry, SynthConfig)> {
    const SIZES_MM: [f64; 9] = [0.35, 0.5, 0.6, 0.7, 0.9, 1.1, 1.4, 1.8, 2.35];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rpms = spec.machine.rpms();
    let load_kn = spec.machine.loads_kn()[0];
    let mut out = Vec::with_capacity(spec.n_healthy + spec.n_faulty);
    let labels = std::iter::repeat_n(Label::Healthy, spec.n_healthy)
        .chain(std::iter::repeat_n(Label::Faulty, spec.n_faulty));
    for (idx, label) in labels.enumerate() {
        let rpm = rpms[rng.gen_range(0..rpms.len())];
        let shaft = rpm as f64 / 60.0;
        let mut cfg = SynthConfig {
            seed: rng.gen(),
            duration_s: spec.duration_s,
            rpm,
            defect: None,
            noise_rms: rng.gen_range(0.2..0.5),
            shaft_harmonic_amplitudes: vec![1.0, rng.gen_range(0.1..0.6), rng.gen_range(0.05..0.3)],
        };
        let (defect_type, size) = if label.is_faulty() {
            cfg.defect = Some(DefectSpec {
                impulse_rate_hz: shaft * rng.gen_range(3.0..5.5),
                impulse_amplitude: rng.gen_range(2.5..4.0),
                decay_constant: rng.gen_range(300.0..600.0),
                resonance_hz: rng.gen_range(1000.0..1800.0),
            });
            let t = if rng.gen_bool(0.5) {
                DefectType::Inner
            } else {
                DefectType::Outer
            };
            (t, Some(SIZES_MM[rng.gen_range(0..SIZES_MM.len())]))
        } else {
            (DefectType::None, None)
        };
        let entry = ManifestEntry {
            file_path: format!("synth_{label}_{idx:05}.{}", spec.format),
            machine: spec.machine,
            sensor_id: spec.sensor_id,
            signal: spec.signal,
            label,
            defect_type,
            defect_size_mm: size,
            rpm,
            load_kn,
            format: spec.format,
        };
        out.push((entry, cfg));
    }
    out
}
