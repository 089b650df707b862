use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::loader::load_recording;
use crate::data::manifest::{Machine, Manifest, ManifestEntry, SignalKind};
use crate::data::synth::{generate_synthetic_recording, synth_corpus, SynthCorpusSpec};
use crate::error::{Error, Result};
use crate::signal::{segment_seconds, Label, Recording, Segment, SegmentMeta};

/// Defect sizes (mm) whose sensor-1 data forms the training faults.
pub const TRAINING_DEFECT_SIZES_MM: [f64; 2] = [0.35, 0.5];
/// Accelerometer used for training.
pub const TRAINING_SENSOR: u8 = 1;

/// Normalized one-second segments of `rec`, labelled from `source`.
pub fn segments_from_recording(rec: &Recording, source: &Arc<ManifestEntry>) -> Vec<Segment> {
    segment_seconds(rec)
        .into_iter()
        .enumerate()
        .map(|(window_index, w)| {
            Segment::from_window(
                w,
                source.label,
                SegmentMeta {
                    source: Arc::clone(source),
                    window_index,
                },
            )
        })
        .collect()
}

/// Segments of every (entry, recording) pair, in input order.
pub fn build_dataset(sources: &[(Arc<ManifestEntry>, Recording)]) -> Vec<Segment> {
    sources
        .par_iter()
        .map(|(e, r)| segments_from_recording(r, e))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Loads and segments every recording listed in `manifest`. Files are read in
/// parallel; segments come back in manifest order.
pub fn load_manifest_segments(manifest: &Manifest) -> Result<Vec<Segment>> {
    let per_file: Vec<Vec<Segment>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let rec = load_recording(manifest.resolve(entry), entry.format)?;
            Ok(segments_from_recording(&rec, &Arc::new(entry.clone())))
        })
        .collect::<Result<_>>()?;
    Ok(per_file.into_iter().flatten().collect())
}

/// Generates and segments a synthetic corpus.
pub fn synth_segments(spec: &SynthCorpusSpec) -> Result<Vec<Segment>> {
    let per_file: Vec<Vec<Segment>> = synth_corpus(spec)
        .into_par_iter()
        .map(|(entry, cfg)| {
            let (rec, _) = generate_synthetic_recording(&cfg)?;
            Ok(segments_from_recording(&rec, &Arc::new(entry)))
        })
        .collect::<Result<_>>()?;
    Ok(per_file.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitOptions {
    /// `None` pools both machines into one model.
    pub machine: Option<Machine>,
    pub signal: SignalKind,
    pub seed: u64,
    /// Keep at most this many training faults (seeded sample); the rest go to test.
    pub cap_fault_segments: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct PaperSplit {
    pub train: Vec<Segment>,
    pub test: Vec<Segment>,
}

/// Whether `entry` comes from the sensor whose data is used for training.
/// Sound rows recorded without a location (sensor 0) count as well.
pub fn is_training_sensor(entry: &ManifestEntry) -> bool {
    match entry.signal {
        SignalKind::Vibration => entry.sensor_id == TRAINING_SENSOR,
        SignalKind::Sound => entry.sensor_id == 0 || entry.sensor_id == TRAINING_SENSOR,
    }
}

pub fn is_training_size(size_mm: Option<f64>) -> bool {
    size_mm.is_some_and(|s| {
        TRAINING_DEFECT_SIZES_MM
            .iter()
            .any(|t| (s - t).abs() < 1e-6)
    })
}

/// Train/test partition of one machine and signal kind:
///
/// * train faults: every training-sensor segment with a 0.35 or 0.5 mm defect
///   (optionally capped),
/// * train healthy: the same number of training-sensor healthy segments, sampled by seed,
/// * test: every other segment of the selected machine(s) and signal.
///
/// Segments of other machines or signal kinds are dropped.
pub fn build_paper_split(segments: Vec<Segment>, opts: &SplitOptions) -> Result<PaperSplit> {
    let selected: Vec<Segment> = segments
        .into_iter()
        .filter(|s| {
            let e = &s.meta.source;
            e.signal == opts.signal && opts.machine.is_none_or(|m| e.machine == m)
        })
        .collect();
    let scope = match opts.machine {
        Some(m) => format!("machine {m}, {}", opts.signal),
        None => format!("both machines, {}", opts.signal),
    };

    let fault_pool: Vec<usize> = selected
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            let e = &s.meta.source;
            s.label == Label::Faulty && is_training_sensor(e) && is_training_size(e.defect_size_mm)
        })
        .map(|(i, _)| i)
        .collect();
    let healthy_pool: Vec<usize> = selected
        .iter()
        .enumerate()
        .filter(|(_, s)| s.label == Label::Healthy && is_training_sensor(&s.meta.source))
        .map(|(i, _)| i)
        .collect();

    let mut missing = Vec::new();
    if fault_pool.is_empty() {
        missing.push(format!(
            "no faulty sensor-{TRAINING_SENSOR} segments with defect size 0.35 or 0.5 mm"
        ));
    }
    if healthy_pool.is_empty() {
        missing.push(format!("no healthy sensor-{TRAINING_SENSOR} segments"));
    }
    if !missing.is_empty() {
        return Err(Error::Data(format!(
            "cannot build the training split for {scope}: {}",
            missing.join("; ")
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let faults = match opts.cap_fault_segments {
        Some(cap) if cap < fault_pool.len() => {
            if cap == 0 {
                return Err(Error::Config("cap_fault_segments must be positive".into()));
            }
            pick(&fault_pool, cap, &mut rng)
        }
        _ => fault_pool,
    };
    if healthy_pool.len() < faults.len() {
        return Err(Error::Data(format!(
            "cannot build the training split for {scope}: {} training faults need as many healthy \
             sensor-{TRAINING_SENSOR} segments, only {} available",
            faults.len(),
            healthy_pool.len()
        )));
    }
    let healthy = pick(&healthy_pool, faults.len(), &mut rng);

    let in_train: HashSet<usize> = faults.iter().chain(&healthy).copied().collect();
    let mut train = Vec::with_capacity(in_train.len());
    let mut test = Vec::with_capacity(selected.len() - in_train.len());
    for (i, s) in selected.into_iter().enumerate() {
        if in_train.contains(&i) {
            train.push(s);
        } else {
            test.push(s);
        }
    }
    Ok(PaperSplit { train, test })
}

/// `n` distinct elements of `pool`, seeded, returned in pool order.
fn pick(pool: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx = sample(rng, pool.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| pool[i]).collect()
}
