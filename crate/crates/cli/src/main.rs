//! `selfonn`: train, evaluate and run Self-ONN bearing fault detectors.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use selfonn::data::{Machine, SampleFormat, SignalKind};

use crate::config::{parse_machine, parse_synth_arg, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "selfonn", version, about = "Self-ONN bearing fault detection")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use 64-bit arithmetic.
    #[arg(long, global = true)]
    f64: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Write a structured report here.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Write a CSV report here.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model and write its checkpoint.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Checkpoint path.
        #[arg(long, default_value = "model.sonn")]
        out: PathBuf,
        /// Do not print per-epoch losses.
        #[arg(long)]
        quiet: bool,
    },
    /// Report accuracy, precision, recall and F1 per sensor.
    Evaluate {
        checkpoint: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Evaluate every segment instead of the held-out partition of the manifest.
        #[arg(long)]
        all_segments: bool,
    },
    /// Classify each one-second segment of a recording.
    Infer {
        checkpoint: PathBuf,
        recording: PathBuf,
        /// Recording format (default: from the extension).
        #[arg(long)]
        format: Option<SampleFormat>,
    },
    /// Write a synthetic corpus and its manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        n_healthy: usize,
        #[arg(long, default_value_t = 20)]
        n_faulty: usize,
        /// Seconds per recording.
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
        #[arg(long, default_value = "A")]
        machine: Machine,
        #[arg(long, default_value_t = 1)]
        sensor: u8,
        #[arg(long, default_value = "vibration")]
        signal: SignalKind,
        #[arg(long, default_value = "f32le")]
        format: SampleFormat,
    },
    /// Time single-segment forward passes on one thread.
    Bench {
        /// Checkpoint to time; a freshly initialized model when omitted.
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        /// Segments per repetition.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
    },
    /// Print a checkpoint's configuration, parameter count and checksum.
    Inspect { checkpoint: PathBuf },
}

#[derive(Args, Debug, Default)]
struct DataArgs {
    /// Manifest CSV of recordings.
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
    /// Synthetic corpus: `default` or a JSON spec file.
    #[arg(long, value_name = "default|PATH")]
    synth: Option<String>,
    /// Seed of the synthetic corpus (default: --seed).
    #[arg(long)]
    synth_seed: Option<u64>,
    #[arg(long)]
    n_healthy: Option<usize>,
    #[arg(long)]
    n_faulty: Option<usize>,
    /// A, B or all.
    #[arg(long)]
    machine: Option<String>,
    #[arg(long)]
    signal: Option<SignalKind>,
    /// Keep at most this many training fault segments.
    #[arg(long)]
    cap_fault_segments: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Architecture preset: default or reduced.
    #[arg(long)]
    preset: Option<String>,
    /// Polynomial order of every generative neuron.
    #[arg(long)]
    q_order: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct TrainArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
}

impl DataArgs {
    fn apply(&self, cfg: &mut RunConfig) -> CliResult<()> {
        let d = &mut cfg.data;
        if let Some(m) = &self.manifest {
            d.manifest = Some(m.clone());
            d.synth = None;
        }
        if let Some(s) = &self.synth {
            d.synth = Some(parse_synth_arg(s)?);
            d.manifest = None;
        }
        if let Some(seed) = self.synth_seed {
            d.synth_seed = Some(seed);
        }
        if self.n_healthy.is_some() || self.n_faulty.is_some() {
            let spec = d.synth.as_mut().ok_or_else(|| {
                CliError::Config("--n-healthy/--n-faulty need a synthetic corpus (--synth)".into())
            })?;
            spec.n_healthy = self.n_healthy.unwrap_or(spec.n_healthy);
            spec.n_faulty = self.n_faulty.unwrap_or(spec.n_faulty);
        }
        if let Some(m) = &self.machine {
            d.machine = parse_machine(m).map_err(CliError::Config)?;
        }
        if let Some(s) = self.signal {
            d.signal = s;
        }
        if self.cap_fault_segments.is_some() {
            d.cap_fault_segments = self.cap_fault_segments;
        }
        Ok(())
    }
}

impl ModelArgs {
    /// Applies the overrides; returns whether an architecture was requested explicitly.
    fn apply(&self, cfg: &mut RunConfig) -> CliResult<bool> {
        let explicit = cfg.model.is_some() || self.preset.is_some() || self.q_order.is_some();
        if let Some(name) = &self.preset {
            let preset = selfonn::ModelConfig::preset(name).ok_or_else(|| {
                CliError::Config(format!("unknown preset '{name}' (default, reduced)"))
            })?;
            cfg.model = Some(preset);
        }
        if let Some(q) = self.q_order {
            cfg.model = Some(cfg.model_config().with_q_order(q));
        }
        Ok(explicit)
    }
}

impl TrainArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let t = &mut cfg.train;
        t.max_epochs = self.epochs.unwrap_or(t.max_epochs);
        t.learning_rate = self.lr.unwrap_or(t.learning_rate);
        t.batch_size = self.batch_size.unwrap_or(t.batch_size);
        t.patience = self.patience.unwrap_or(t.patience);
    }
}

fn base_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.f64 {
        cfg.numeric_mode = selfonn::real::NumericMode::F64;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let mut cfg = base_config(&cli)?;
    let out = commands::Outputs {
        json: cli.json.clone(),
        csv: cli.csv.clone(),
    };
    match &cli.command {
        Command::Train {
            data,
            model,
            train,
            out: path,
            quiet,
        } => {
            data.apply(&mut cfg)?;
            model.apply(&mut cfg)?;
            train.apply(&mut cfg);
            cfg.resolve()?;
            commands::train(&cfg, path, *quiet, &out)
        }
        Command::Evaluate {
            checkpoint,
            data,
            model,
            all_segments,
        } => {
            data.apply(&mut cfg)?;
            let explicit = model.apply(&mut cfg)?;
            commands::evaluate(&mut cfg, checkpoint, explicit, *all_segments, &out)
        }
        Command::Infer {
            checkpoint,
            recording,
            format,
        } => commands::infer(checkpoint, recording, *format, &out),
        Command::Synth {
            out: dir,
            n_healthy,
            n_faulty,
            duration,
            machine,
            sensor,
            signal,
            format,
        } => {
            let spec = selfonn::data::SynthCorpusSpec {
                n_healthy: *n_healthy,
                n_faulty: *n_faulty,
                seed: cfg.seed,
                duration_s: *duration,
                machine: *machine,
                sensor_id: *sensor,
                signal: *signal,
                format: *format,
            };
            commands::synth(&spec, dir, &out)
        }
        Command::Bench {
            checkpoint,
            model,
            n,
            repeat,
        } => {
            let explicit = model.apply(&mut cfg)?;
            commands::bench(&cfg, checkpoint.as_deref(), explicit, *n, *repeat, &out)
        }
        Command::Inspect { checkpoint } => commands::inspect(checkpoint, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
