use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use selfonn::data::loader::format_from_extension;
use selfonn::data::synth::generate_synthetic_recording;
use selfonn::data::{
    build_paper_split, load_manifest_segments, load_recording, parse_manifest, synth_corpus,
    synth_segments, write_manifest, write_recording, SampleFormat, SplitOptions, SynthCorpusSpec,
};
use selfonn::eval::{
    bench_forward, classify_segment, compute_metrics, pooled_counts, predict_segments,
    render_table, report_by_group, LatencyStats,
};
use selfonn::model::{load_checkpoint, save_checkpoint, AnyParameters, Checkpoint};
use selfonn::real::{NumericMode, Real};
use selfonn::signal::{normalize_segment, segment_recording};
use selfonn::train::{split_train_validation, train_from, TrainReport};
use selfonn::{ModelConfig, ModelParameters, Segment};

use crate::config::{DataSource, RunConfig};
use crate::error::{CliError, CliResult};

pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Outputs {
    fn write_json(&self, value: &impl Serialize) -> CliResult<()> {
        if let Some(path) = &self.json {
            let text = serde_json::to_string_pretty(value).map_err(selfonn::Error::from)?;
            std::fs::write(path, text + "\n").map_err(selfonn::Error::from)?;
        }
        Ok(())
    }
}

macro_rules! with_params {
    ($any:expr, $p:ident => $body:expr) => {
        match $any {
            AnyParameters::F32($p) => $body,
            AnyParameters::F64($p) => $body,
        }
    };
}

fn load_segments(cfg: &RunConfig) -> CliResult<(DataSource, Vec<Segment>)> {
    let source = cfg.source()?;
    let segments = match &source {
        DataSource::Manifest(path) => load_manifest_segments(&parse_manifest(path)?)?,
        DataSource::Synth(spec) => synth_segments(spec)?,
    };
    if segments.is_empty() {
        return Err(CliError::Data(
            "no complete one-second segments in the data".into(),
        ));
    }
    Ok((source, segments))
}

fn split_options(cfg: &RunConfig) -> SplitOptions {
    SplitOptions {
        machine: cfg.data.machine,
        signal: cfg.data.signal,
        seed: cfg.seed,
        cap_fault_segments: cfg.data.cap_fault_segments,
    }
}

pub fn train(cfg: &RunConfig, out: &Path, quiet: bool, outputs: &Outputs) -> CliResult<()> {
    let (source, segments) = load_segments(cfg)?;
    let pool = match source {
        DataSource::Manifest(_) => build_paper_split(segments, &split_options(cfg))?.train,
        DataSource::Synth(_) => segments,
    };
    let (fit, val) = split_train_validation(pool, cfg.train.validation_fraction, cfg.seed)?;
    eprintln!(
        "training on {} segments, validating on {} ({} mode)",
        fit.len(),
        val.len(),
        cfg.numeric_mode
    );
    let report = match cfg.numeric_mode {
        NumericMode::F32 => train_typed::<f32>(cfg, &fit, &val, out, quiet)?,
        NumericMode::F64 => train_typed::<f64>(cfg, &fit, &val, out, quiet)?,
    };
    println!(
        "best epoch {} of {}, validation loss {:.6}{}",
        report.best_epoch,
        report.epochs.len(),
        report.best_validation_loss,
        if report.stopped_early {
            " (stopped early)"
        } else {
            ""
        }
    );
    println!("checkpoint written to {}", out.display());
    outputs.write_json(&json!({ "run_config": cfg, "report": report }))?;
    if let Some(path) = &outputs.csv {
        let mut text = String::from("epoch,train_loss,validation_loss\n");
        for e in &report.epochs {
            text.push_str(&format!(
                "{},{},{}\n",
                e.epoch, e.train_loss, e.validation_loss
            ));
        }
        std::fs::write(path, text).map_err(selfonn::Error::from)?;
    }
    Ok(())
}

fn train_typed<T: Real>(
    cfg: &RunConfig,
    fit: &[Segment],
    val: &[Segment],
    out: &Path,
    quiet: bool,
) -> CliResult<TrainReport> {
    let init = ModelParameters::<T>::init(&cfg.model_config(), cfg.seed)?;
    let outcome = train_from(init, fit, val, &cfg.train, |e| {
        if !quiet {
            eprintln!(
                "epoch {:>4}  train {:.6}  validation {:.6}",
                e.epoch, e.train_loss, e.validation_loss
            );
        }
    })?;
    let mut report = outcome.report;
    report.checkpoint = Some(out.display().to_string());
    let metadata = json!({
        "run_config": cfg,
        "best_epoch": report.best_epoch,
        "best_validation_loss": report.best_validation_loss,
    });
    save_checkpoint(&outcome.params, out, &metadata.to_string())?;
    Ok(report)
}

fn open_checkpoint(path: &Path, expected: Option<&ModelConfig>) -> CliResult<Checkpoint> {
    let ckpt = load_checkpoint(path)?;
    if let Some(cfg) = expected {
        ckpt.expect_config(cfg).map_err(selfonn::Error::from)?;
    }
    Ok(ckpt)
}

pub fn evaluate(
    cfg: &mut RunConfig,
    checkpoint: &Path,
    explicit_model: bool,
    all_segments: bool,
    outputs: &Outputs,
) -> CliResult<()> {
    let expected = explicit_model.then(|| cfg.model_config());
    let ckpt = open_checkpoint(checkpoint, expected.as_ref())?;
    if let Some(spec) = &mut cfg.data.synth {
        spec.seed = cfg.data.synth_seed.unwrap_or(cfg.seed);
    }
    let (source, segments) = load_segments(cfg)?;
    let segments = match source {
        DataSource::Manifest(_) if !all_segments => {
            build_paper_split(segments, &split_options(cfg))?.test
        }
        _ => segments,
    };
    if segments.is_empty() {
        return Err(CliError::Data("no segments to evaluate".into()));
    }
    let predictions = with_params!(&ckpt.params, p => predict_segments(p, &segments)?
        .into_iter()
        .map(|(_, label)| label)
        .collect::<Vec<_>>());
    let reports = report_by_group(&segments, &predictions)?;
    let pooled = compute_metrics(&pooled_counts(&reports))?;
    print!("{}", render_table(&reports));
    println!(
        "all segments: {} evaluated, accuracy {:.2}%, F1 {:.2}%",
        segments.len(),
        100.0 * pooled.accuracy,
        100.0 * pooled.f1
    );
    outputs.write_json(&json!({
        "run_config": cfg,
        "checkpoint": checkpoint.display().to_string(),
        "checkpoint_checksum": format!("{:08x}", ckpt.checksum),
        "groups": reports,
        "pooled": pooled,
    }))?;
    if let Some(path) = &outputs.csv {
        selfonn::eval::report::write_csv(path, &reports)?;
    }
    Ok(())
}

pub fn infer(
    checkpoint: &Path,
    recording: &Path,
    format: Option<SampleFormat>,
    outputs: &Outputs,
) -> CliResult<()> {
    let ckpt = load_checkpoint(checkpoint)?;
    let format = format.unwrap_or_else(|| format_from_extension(recording));
    let rec = load_recording(recording, format)?;
    let window = ckpt.config().input_length;
    if rec.len() < window {
        return Err(CliError::Data(format!(
            "{}: {} samples, need at least {window} for one segment",
            recording.display(),
            rec.len()
        )));
    }
    let mut rows = Vec::new();
    with_params!(&ckpt.params, p => {
        for (index, w) in segment_recording(&rec.samples, window).into_iter().enumerate() {
            let x = normalize_segment(&w.iter().map(|&v| Real::from_f64(v as f64)).collect::<Vec<_>>());
            let out = p.forward(&x)?;
            let label = classify_segment(&out)?;
            let out: Vec<f64> = out.iter().map(|v| v.as_f64()).collect();
            let scores: Vec<String> = out.iter().map(|v| format!("{v:.6}")).collect();
            println!("{index} {} {label}", scores.join(" "));
            rows.push(json!({ "index": index, "outputs": out, "label": label }));
        }
    });
    outputs.write_json(&json!({
        "checkpoint": checkpoint.display().to_string(),
        "recording": recording.display().to_string(),
        "segments": rows,
    }))
}

pub fn synth(spec: &SynthCorpusSpec, dir: &Path, outputs: &Outputs) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(selfonn::Error::from)?;
    let corpus = synth_corpus(spec);
    for (entry, cfg) in &corpus {
        let (rec, _) = generate_synthetic_recording(cfg)?;
        write_recording(dir.join(&entry.file_path), &rec, entry.format)?;
    }
    let entries: Vec<_> = corpus.iter().map(|(e, _)| e.clone()).collect();
    let manifest = dir.join("manifest.csv");
    write_manifest(&manifest, &entries)?;
    println!(
        "wrote {} recordings ({} healthy, {} faulty) and {}",
        entries.len(),
        spec.n_healthy,
        spec.n_faulty,
        manifest.display()
    );
    outputs.write_json(&json!({
        "spec": spec,
        "manifest": manifest.display().to_string(),
        "recordings": corpus.iter().map(|(e, c)| json!({ "entry": e, "config": c })).collect::<Vec<_>>(),
    }))
}

pub fn bench(
    cfg: &RunConfig,
    checkpoint: Option<&Path>,
    explicit_model: bool,
    n: usize,
    repeat: usize,
    outputs: &Outputs,
) -> CliResult<()> {
    if n == 0 {
        return Err(CliError::Config("--n must be positive".into()));
    }
    let expected = explicit_model.then(|| cfg.model_config());
    let params = match checkpoint {
        Some(path) => open_checkpoint(path, expected.as_ref())?.params,
        None => match cfg.numeric_mode {
            NumericMode::F32 => {
                AnyParameters::F32(ModelParameters::init(&cfg.model_config(), cfg.seed)?)
            }
            NumericMode::F64 => {
                AnyParameters::F64(ModelParameters::init(&cfg.model_config(), cfg.seed)?)
            }
        },
    };
    let stats: LatencyStats = with_params!(&params, p => bench_forward(p, n, repeat)?);
    let count = with_params!(&params, p => p.param_count());
    println!(
        "{} parameters, {} mode, {} timed forward passes on one thread",
        count,
        params.mode(),
        stats.timings
    );
    println!(
        "mean {:.3} ms  median {:.3} ms  p95 {:.3} ms  min {:.3} ms  max {:.3} ms",
        stats.mean_ms, stats.median_ms, stats.p95_ms, stats.min_ms, stats.max_ms
    );
    println!(
        "real-time factor {:.1} (one-second segments)",
        stats.real_time_factor
    );
    outputs.write_json(&json!({ "parameters": count, "mode": params.mode(), "stats": stats }))
}

pub fn inspect(checkpoint: &Path, outputs: &Outputs) -> CliResult<()> {
    let ckpt = load_checkpoint(checkpoint)?;
    let cfg = ckpt.config();
    let count = with_params!(&ckpt.params, p => p.param_count());
    println!("checkpoint   {}", checkpoint.display());
    println!("mode         {}", ckpt.params.mode());
    println!("checksum     {:08x}", ckpt.checksum);
    println!("input        {} samples", cfg.input_length);
    for (i, (l, (c, len))) in cfg
        .op_layers
        .iter()
        .zip(cfg.shape_trace().into_iter().skip(1))
        .enumerate()
    {
        println!(
            "op layer {}   {} neurons, kernel {}, stride {} -> {c}x{len}",
            i + 1,
            l.out_neurons,
            l.kernel_size,
            l.stride
        );
    }
    println!(
        "dense        {} (flatten {})",
        cfg.dense_width,
        cfg.flatten_width()
    );
    println!("outputs      {}", cfg.output_classes);
    println!("Q            {}", cfg.q_order);
    println!("parameters   {count}");
    let metadata: serde_json::Value = if ckpt.metadata.is_empty() {
        serde_json::Value::Null
    } else {
        serde_json::from_str(&ckpt.metadata).map_err(selfonn::Error::from)?
    };
    if !metadata.is_null() {
        println!("metadata     {metadata}");
    }
    outputs.write_json(&json!({
        "mode": ckpt.params.mode(),
        "checksum": format!("{:08x}", ckpt.checksum),
        "config": cfg,
        "parameters": count,
        "metadata": metadata,
    }))
}
