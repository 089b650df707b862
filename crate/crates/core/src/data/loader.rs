//! Recording files: CSV (one decimal amplitude per line) or raw little-endian `f32`.

use std::path::Path;

use crate::data::manifest::SampleFormat;
use crate::error::{Error, Result};
use crate::signal::Recording;

pub fn load_recording(path: impl AsRef<Path>, format: SampleFormat) -> Result<Recording> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::Recording {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    decode_recording(&bytes, format).map_err(|message| Error::Recording {
        path: path.to_path_buf(),
        message,
    })
}

/// Guesses the format from the file extension (`.csv`/`.txt` vs anything else).
pub fn format_from_extension(path: &Path) -> SampleFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") || ext.eq_ignore_ascii_case("txt") => {
            SampleFormat::Csv
        }
        _ => SampleFormat::F32le,
    }
}

pub fn decode_recording(
    bytes: &[u8],
    format: SampleFormat,
) -> std::result::Result<Recording, String> {
    if bytes.is_empty() {
        return Err("empty recording file".into());
    }
    let samples = match format {
        SampleFormat::F32le => {
            if !bytes.len().is_multiple_of(4) {
                return Err(format!(
                    "f32le file length {} is not a multiple of 4",
                    bytes.len()
                ));
            }
            bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect()
        }
        SampleFormat::Csv => {
            let text = std::str::from_utf8(bytes).map_err(|e| format!("not UTF-8: {e}"))?;
            let mut samples = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let v = line
                    .parse::<f32>()
                    .map_err(|_| format!("line {}: cannot parse '{line}' as a number", i + 1))?;
                samples.push(v);
            }
            if samples.is_empty() {
                return Err("recording holds no samples".into());
            }
            samples
        }
    };
    Ok(Recording::new(samples))
}

pub fn write_f32le(path: impl AsRef<Path>, rec: &Recording) -> Result<()> {
    let mut out = Vec::with_capacity(rec.samples.len() * 4);
    for s in &rec.samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_csv(path: impl AsRef<Path>, rec: &Recording) -> Result<()> {
    let mut out = String::with_capacity(rec.samples.len() * 12);
    for s in &rec.samples {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_recording(
    path: impl AsRef<Path>,
    rec: &Recording,
    format: SampleFormat,
) -> Result<()> {
    match format {
        SampleFormat::Csv => write_csv(path, rec),
        SampleFormat::F32le => write_f32le(path, rec),
    }
}
