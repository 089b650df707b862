//! Self-Organized Operational Neural Networks (Self-ONNs) for 1D signals.
//!
//! The crate covers the full bearing fault detection workflow:
//!
//! * [`signal`] splits recordings into one-second windows and min-max normalizes them.
//! * [`model`] holds the generative-neuron layers, the forward pass and the checkpoint format.
//! * [`train`] implements MSE backpropagation, Adam and the training loop.
//! * [`data`] parses manifests, loads recordings, builds train/test splits and synthesizes
//!   bearing signals.
//! * [`eval`] classifies segments, computes precision/recall/F1/accuracy and benchmarks latency.

pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod real;
pub mod signal;
pub mod train;

pub use error::{Error, Result};
pub use model::{ModelConfig, ModelParameters};
pub use real::Real;
pub use signal::{Label, Segment};

/// Samples per second for every recording handled by the pipeline.
pub const SAMPLE_RATE_HZ: u32 = 4096;

/// Samples per segment (one second at [`SAMPLE_RATE_HZ`]).
pub const SEGMENT_LEN: usize = 4096;
