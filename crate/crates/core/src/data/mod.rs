//! Manifest-driven ingestion, train/test split construction and synthetic
//! bearing signals.

pub mod baseline;
pub mod dataset;
pub mod loader;
pub mod manifest;
pub mod synth;

pub use baseline::{EnergyRatio, EnergyRatioDetector, DEFAULT_BAND_HZ};
pub use dataset::{
    build_dataset, build_paper_split, load_manifest_segments, segments_from_recording,
    synth_segments, PaperSplit, SplitOptions,
};
pub use loader::{load_recording, write_recording};
pub use manifest::{
    parse_manifest, write_manifest, DefectType, Machine, Manifest, ManifestEntry, SampleFormat,
    SignalKind,
};
pub use synth::{
    generate_synthetic_recording, synth_corpus, DefectSpec, SynthConfig, SynthCorpusSpec,
};
