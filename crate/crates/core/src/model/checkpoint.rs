//! Binary checkpoint format (all integers and reals little-endian):
//!
//! ```text
//! "SONN"                    magic, 4 bytes
//! u16 version = 1
//! u8  numeric mode          0 = f32, 1 = f64
//! u32 input_length
//! u32 n_op_layers
//! u32 out, u32 K, u32 stride        per operational layer
//! u32 Q, u32 dense_width, u32 output_classes
//! weight blocks             per layer: weights then biases, reals of the mode's width;
//!                           operational weights in [out][in][r][q] order, dense in [out][in][q]
//! u32 metadata length, UTF-8 JSON metadata (may be empty)
//! u32 CRC-32 of every preceding byte
//! ```

use std::path::Path;

use thiserror::Error;

use crate::error::Result;
use crate::model::config::{ModelConfig, OpLayerSpec};
use crate::model::network::ModelParameters;
use crate::real::{NumericMode, Real};

pub const MAGIC: &[u8; 4] = b"SONN";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum CheckpointError {
    #[error("bad magic: expected \"SONN\", found {0:?}")]
    BadMagic(Vec<u8>),
    #[error("unsupported checkpoint version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u16 },
    #[error("unknown numeric mode tag {0}")]
    UnknownMode(u8),
    #[error("truncated checkpoint: needed {needed} bytes at offset {offset}, file has {len}")]
    Truncated {
        offset: usize,
        needed: usize,
        len: usize,
    },
    #[error("checkpoint shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("invalid metadata: {0}")]
    Metadata(String),
}

/// Parameters in whichever numeric mode the file was written in.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyParameters {
    F32(ModelParameters<f32>),
    F64(ModelParameters<f64>),
}

impl AnyParameters {
    pub fn mode(&self) -> NumericMode {
        match self {
            AnyParameters::F32(_) => NumericMode::F32,
            AnyParameters::F64(_) => NumericMode::F64,
        }
    }

    pub fn config(&self) -> &ModelConfig {
        match self {
            AnyParameters::F32(p) => &p.config,
            AnyParameters::F64(p) => &p.config,
        }
    }

    /// Parameters in mode `T`, converting if the stored mode differs.
    pub fn to_mode<T: Real>(&self) -> ModelParameters<T> {
        match self {
            AnyParameters::F32(p) => p.cast(),
            AnyParameters::F64(p) => p.cast(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: AnyParameters,
    /// Free-form JSON describing how the parameters were produced.
    pub metadata: String,
    pub checksum: u32,
}

impl Checkpoint {
    pub fn config(&self) -> &ModelConfig {
        self.params.config()
    }

    /// Fails with [`CheckpointError::ShapeMismatch`] unless the stored architecture is `expected`.
    pub fn expect_config(&self, expected: &ModelConfig) -> Result<(), CheckpointError> {
        if self.config() != expected {
            return Err(CheckpointError::ShapeMismatch(format!(
                "checkpoint holds {:?}, expected {:?}",
                self.config(),
                expected
            )));
        }
        Ok(())
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

/// Serializes `params` with `metadata` appended.
pub fn encode<T: Real>(params: &ModelParameters<T>, metadata: &str) -> Vec<u8> {
    let cfg = &params.config;
    let mut out = Vec::with_capacity(64 + params.param_count() * T::BYTES + metadata.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(T::MODE.tag());
    put_u32(&mut out, cfg.input_length);
    put_u32(&mut out, cfg.op_layers.len());
    for spec in &cfg.op_layers {
        put_u32(&mut out, spec.out_neurons);
        put_u32(&mut out, spec.kernel_size);
        put_u32(&mut out, spec.stride);
    }
    put_u32(&mut out, cfg.q_order);
    put_u32(&mut out, cfg.dense_width);
    put_u32(&mut out, cfg.output_classes);
    for block in params.blocks() {
        for &v in block {
            v.write_le(&mut out);
        }
    }
    put_u32(&mut out, metadata.len());
    out.extend_from_slice(metadata.as_bytes());
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.bytes.len() - self.pos < n {
            return Err(CheckpointError::Truncated {
                offset: self.pos,
                needed: n,
                len: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
}

/// Parses a checkpoint, verifying structure and checksum.
pub fn decode(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
    let mut rd = Reader { bytes, pos: 0 };
    let magic = rd
        .take(4)
        .map_err(|_| CheckpointError::BadMagic(bytes.to_vec()))?;
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic(magic.to_vec()));
    }
    let version = u16::from_le_bytes(rd.take(2)?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(CheckpointError::VersionMismatch { found: version });
    }
    let tag = rd.take(1)?[0];
    let mode = NumericMode::from_tag(tag).ok_or(CheckpointError::UnknownMode(tag))?;

    let input_length = rd.u32()?;
    let n_layers = rd.u32()?;
    // Each layer spec takes 12 bytes; reject absurd counts before allocating.
    if n_layers > (bytes.len() - rd.pos) / 12 {
        return Err(CheckpointError::Truncated {
            offset: rd.pos,
            needed: n_layers * 12,
            len: bytes.len(),
        });
    }
    let mut op_layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        op_layers.push(OpLayerSpec::new(rd.u32()?, rd.u32()?, rd.u32()?));
    }
    let config = ModelConfig {
        input_length,
        op_layers,
        q_order: rd.u32()?,
        dense_width: rd.u32()?,
        output_classes: rd.u32()?,
    };
    config
        .validate()
        .map_err(|e| CheckpointError::ShapeMismatch(e.to_string()))?;

    let params = match mode {
        NumericMode::F32 => AnyParameters::F32(read_blocks(&mut rd, &config)?),
        NumericMode::F64 => AnyParameters::F64(read_blocks(&mut rd, &config)?),
    };

    let meta_len = rd.u32()?;
    let metadata = std::str::from_utf8(rd.take(meta_len)?)
        .map_err(|e| CheckpointError::Metadata(e.to_string()))?
        .to_owned();
    let covered = rd.pos;
    let stored = rd.u32()? as u32;
    if rd.pos != bytes.len() {
        return Err(CheckpointError::ShapeMismatch(format!(
            "{} unexpected bytes after the checksum",
            bytes.len() - rd.pos
        )));
    }
    let computed = crc32fast::hash(&bytes[..covered]);
    if stored != computed {
        return Err(CheckpointError::ChecksumMismatch { stored, computed });
    }
    Ok(Checkpoint {
        params,
        metadata,
        checksum: stored,
    })
}

fn read_blocks<T: Real>(
    rd: &mut Reader<'_>,
    config: &ModelConfig,
) -> Result<ModelParameters<T>, CheckpointError> {
    let total = config.param_count();
    if total.saturating_mul(T::BYTES) > rd.bytes.len() - rd.pos {
        return Err(CheckpointError::Truncated {
            offset: rd.pos,
            needed: total * T::BYTES,
            len: rd.bytes.len(),
        });
    }
    let mut params = ModelParameters::<T>::zeros(config)
        .map_err(|e| CheckpointError::ShapeMismatch(e.to_string()))?;
    for block in params.blocks_mut() {
        let raw = rd.take(block.len() * T::BYTES)?;
        for (v, chunk) in block.iter_mut().zip(raw.chunks_exact(T::BYTES)) {
            *v = T::read_le(chunk);
        }
    }
    Ok(params)
}

pub fn save_checkpoint<T: Real>(
    params: &ModelParameters<T>,
    path: impl AsRef<Path>,
    metadata: &str,
) -> Result<()> {
    std::fs::write(path, encode(params, metadata))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let bytes = std::fs::read(path)?;
    Ok(decode(&bytes)?)
}
