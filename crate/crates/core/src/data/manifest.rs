//! Recording manifest: one CSV row per recording file.
//!
//! ```text
//! file,machine,sensor,signal,label,defect_type,defect_size_mm,rpm,load_kn,format
//! a01.f32le,A,1,vibration,faulty,outer,0.35,480,0.18,f32le
//! ```

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Label;

pub const MANIFEST_HEADER: [&str; 10] = [
    "file",
    "machine",
    "sensor",
    "signal",
    "label",
    "defect_type",
    "defect_size_mm",
    "rpm",
    "load_kn",
    "format",
];

pub const MIN_DEFECT_MM: f64 = 0.35;
pub const MAX_DEFECT_MM: f64 = 2.35;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Machine {
    A,
    B,
}

impl Machine {
    pub fn rpms(self) -> &'static [u32] {
        match self {
            Machine::A => &[480, 680, 1010],
            Machine::B => &[240, 360, 480, 700, 1020],
        }
    }

    pub fn loads_kn(self) -> &'static [f64] {
        match self {
            Machine::A => &[0.18, 0.23],
            Machine::B => &[0.18],
        }
    }

    /// Highest accelerometer id on this machine.
    pub fn sensors(self) -> u8 {
        match self {
            Machine::A => 5,
            Machine::B => 6,
        }
    }
}

impl fmt::Display for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Machine::A => "A",
            Machine::B => "B",
        })
    }
}

impl FromStr for Machine {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "A" | "a" => Ok(Machine::A),
            "B" | "b" => Ok(Machine::B),
            other => Err(format!("unknown machine '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Sound,
    Vibration,
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalKind::Sound => "sound",
            SignalKind::Vibration => "vibration",
        })
    }
}

impl FromStr for SignalKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sound" => Ok(SignalKind::Sound),
            "vibration" => Ok(SignalKind::Vibration),
            other => Err(format!("unknown signal kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectType {
    None,
    Inner,
    Outer,
}

impl fmt::Display for DefectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefectType::None => "none",
            DefectType::Inner => "inner",
            DefectType::Outer => "outer",
        })
    }
}

impl FromStr for DefectType {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "" => Ok(DefectType::None),
            "inner" => Ok(DefectType::Inner),
            "outer" => Ok(DefectType::Outer),
            other => Err(format!("unknown defect type '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFormat {
    Csv,
    F32le,
}

impl fmt::Display for SampleFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleFormat::Csv => "csv",
            SampleFormat::F32le => "f32le",
        })
    }
}

impl FromStr for SampleFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(SampleFormat::Csv),
            "f32le" => Ok(SampleFormat::F32le),
            other => Err(format!("unknown sample format '{other}'")),
        }
    }
}

/// One recording file and its working condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file_path: String,
    pub machine: Machine,
    /// Accelerometer id (A: 1-5, B: 1-6). Sound rows use 0 ("any location").
    pub sensor_id: u8,
    pub signal: SignalKind,
    pub label: Label,
    pub defect_type: DefectType,
    pub defect_size_mm: Option<f64>,
    pub rpm: u32,
    pub load_kn: f64,
    pub format: SampleFormat,
}

impl ManifestEntry {
    /// Checks every cross-field rule, returning a message naming the violated one.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let max = self.machine.sensors();
        let sensor_ok = match self.signal {
            SignalKind::Vibration => (1..=max).contains(&self.sensor_id),
            SignalKind::Sound => self.sensor_id <= max,
        };
        if !sensor_ok {
            return Err(format!(
                "sensor {} is not valid for {} on machine {} (accelerometers 1-{max}, sound may use 0)",
                self.sensor_id, self.signal, self.machine
            ));
        }
        match (self.label, self.defect_type, self.defect_size_mm) {
            (Label::Healthy, DefectType::None, None) => {}
            (Label::Healthy, _, Some(size)) => {
                return Err(format!(
                    "healthy recording carries a defect size ({size} mm)"
                ))
            }
            (Label::Healthy, t, None) => {
                return Err(format!("healthy recording has defect type '{t}'"))
            }
            (Label::Faulty, DefectType::None, _) => {
                return Err("faulty recording needs defect type inner or outer".into())
            }
            (Label::Faulty, _, None) => return Err("faulty recording needs a defect size".into()),
            (Label::Faulty, _, Some(size)) => {
                if !(MIN_DEFECT_MM - TOL..=MAX_DEFECT_MM + TOL).contains(&size) {
                    return Err(format!(
                        "defect size {size} mm outside [{MIN_DEFECT_MM}, {MAX_DEFECT_MM}]"
                    ));
                }
            }
        }
        if !self.machine.rpms().contains(&self.rpm) {
            return Err(format!(
                "rpm {} is not a machine {} speed {:?}",
                self.rpm,
                self.machine,
                self.machine.rpms()
            ));
        }
        if !self
            .machine
            .loads_kn()
            .iter()
            .any(|l| (l - self.load_kn).abs() < TOL)
        {
            return Err(format!(
                "load {} kN is not a machine {} load {:?}",
                self.load_kn,
                self.machine,
                self.machine.loads_kn()
            ));
        }
        Ok(())
    }

    /// Manifest row for this entry (inverse of parsing).
    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.file_path.clone(),
            self.machine.to_string(),
            self.sensor_id.to_string(),
            self.signal.to_string(),
            self.label.to_string(),
            self.defect_type.to_string(),
            self.defect_size_mm
                .map(|s| s.to_string())
                .unwrap_or_default(),
            self.rpm.to_string(),
            self.load_kn.to_string(),
            self.format.to_string(),
        ]
    }
}

/// Parsed manifest with the directory its relative paths resolve against.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub base_dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.base_dir.join(&entry.file_path)
    }
}

pub fn parse_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Manifest {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    let entries = parse_manifest_from(file, path)?;
    Ok(Manifest {
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        entries,
    })
}

/// Parses manifest CSV text; `origin` only labels error messages.
pub fn parse_manifest_from(reader: impl Read, origin: &Path) -> Result<Vec<ManifestEntry>> {
    let err = |line: u64, message: String| Error::Manifest {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().ne(MANIFEST_HEADER.iter().copied()) {
        return Err(err(
            1,
            format!(
                "header must be '{}', found '{}'",
                MANIFEST_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut entries = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let entry = parse_row(&record).map_err(|m| err(line, m))?;
        entry.validate().map_err(|m| err(line, m))?;
        entries.push(entry);
    }
    Ok(entries)
}

fn parse_row(r: &csv::StringRecord) -> std::result::Result<ManifestEntry, String> {
    let field = |i: usize| r.get(i).unwrap_or("");
    let file_path = field(0).to_string();
    if file_path.is_empty() {
        return Err("empty file path".into());
    }
    let sensor_id = field(2)
        .parse::<u8>()
        .map_err(|_| format!("unknown sensor '{}'", field(2)))?;
    let defect_size_mm = match field(6) {
        "" => None,
        s => Some(
            s.parse::<f64>()
                .map_err(|_| format!("invalid defect size '{s}'"))?,
        ),
    };
    let rpm = field(7)
        .parse::<u32>()
        .map_err(|_| format!("invalid rpm '{}'", field(7)))?;
    let load_kn = field(8)
        .parse::<f64>()
        .map_err(|_| format!("invalid load '{}'", field(8)))?;
    Ok(ManifestEntry {
        file_path,
        machine: field(1).parse()?,
        sensor_id,
        signal: field(3).parse()?,
        label: field(4).parse()?,
        defect_type: field(5).parse()?,
        defect_size_mm,
        rpm,
        load_kn,
        format: field(9).parse()?,
    })
}

/// Writes a manifest with the standard header.
pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_io)?;
    w.write_record(MANIFEST_HEADER).map_err(csv_io)?;
    for e in entries {
        w.write_record(e.to_record()).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
