//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use selfonn::data::{Machine, SignalKind, SynthCorpusSpec};
use selfonn::real::NumericMode;
use selfonn::train::TrainConfig;
use selfonn::ModelConfig;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub numeric_mode: NumericMode,
    /// `None` means the default architecture.
    pub model: Option<ModelConfig>,
    pub train: TrainConfig,
    pub data: DataConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            numeric_mode: NumericMode::F32,
            model: None,
            train: TrainConfig::default(),
            data: DataConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub manifest: Option<PathBuf>,
    pub synth: Option<SynthCorpusSpec>,
    /// Seed of the synthetic corpus; the run seed when unset.
    pub synth_seed: Option<u64>,
    /// `None` pools both machines.
    pub machine: Option<Machine>,
    pub signal: SignalKind,
    pub cap_fault_segments: Option<usize>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            synth: None,
            synth_seed: None,
            machine: Some(Machine::A),
            signal: SignalKind::Vibration,
            cap_fault_segments: None,
        }
    }
}

/// Where segments come from.
pub enum DataSource {
    Manifest(PathBuf),
    Synth(SynthCorpusSpec),
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn model_config(&self) -> ModelConfig {
        self.model.clone().unwrap_or_default()
    }

    /// Fills every derived value in so the config alone reproduces the run.
    pub fn resolve(&mut self) -> CliResult<()> {
        self.train.seed = self.seed;
        if self.model.is_none() {
            self.model = Some(ModelConfig::default());
        }
        if let Some(spec) = &mut self.data.synth {
            let seed = self.data.synth_seed.unwrap_or(self.seed);
            spec.seed = seed;
            self.data.synth_seed = Some(seed);
        }
        self.model_config().validate()?;
        self.train.validate()?;
        Ok(())
    }

    pub fn source(&self) -> CliResult<DataSource> {
        match (&self.data.manifest, &self.data.synth) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "give either a manifest or a synthetic spec, not both".into(),
            )),
            (Some(m), None) => Ok(DataSource::Manifest(m.clone())),
            (None, Some(s)) => Ok(DataSource::Synth(s.clone())),
            (None, None) => Err(CliError::Config(
                "no data: pass --manifest PATH or --synth default|PATH".into(),
            )),
        }
    }
}

/// `default` or a path to a JSON [`SynthCorpusSpec`].
pub fn parse_synth_arg(arg: &str) -> CliResult<SynthCorpusSpec> {
    if arg == "default" {
        return Ok(SynthCorpusSpec::default());
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| CliError::Config(format!("synthetic spec {arg}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("synthetic spec {arg}: {e}")))
}

/// `A`, `B` or `all`.
pub fn parse_machine(s: &str) -> Result<Option<Machine>, String> {
    if s.eq_ignore_ascii_case("all") {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}
