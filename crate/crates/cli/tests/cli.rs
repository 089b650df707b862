use std::path::Path;
use std::process::{Command, Output};

use selfonn::data::write_recording;
use selfonn::model::save_checkpoint;
use selfonn::signal::Recording;
use selfonn::{ModelConfig, ModelParameters};

fn selfonn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfonn"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn assert_ok(o: &Output) {
    assert!(
        o.status.success(),
        "status {:?}\nstdout:\n{}\nstderr:\n{}",
        o.status,
        stdout(o),
        String::from_utf8_lossy(&o.stderr)
    );
}

fn train_small(dir: &Path, extra: &[&str], out: &str) {
    let mut args = vec![
        "train",
        "--synth",
        "default",
        "--n-healthy",
        "3",
        "--n-faulty",
        "3",
        "--preset",
        "reduced",
        "--epochs",
        "2",
        "--quiet",
        "--out",
        out,
    ];
    args.extend_from_slice(extra);
    assert_ok(&selfonn(&args, dir));
}

#[test]
fn synth_writes_recordings_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = selfonn(
        &[
            "synth",
            "--n-healthy",
            "20",
            "--n-faulty",
            "20",
            "--seed",
            "7",
            "--out",
            "corpus",
        ],
        dir.path(),
    );
    assert_ok(&o);
    let corpus = dir.path().join("corpus");
    let files = std::fs::read_dir(&corpus).unwrap().count();
    assert_eq!(files, 41);
    let manifest = selfonn::data::parse_manifest(corpus.join("manifest.csv")).unwrap();
    assert_eq!(manifest.entries.len(), 40);
    let segs = selfonn::data::load_manifest_segments(&manifest).unwrap();
    assert_eq!(segs.len(), 40);
}

#[test]
fn train_writes_checkpoint_and_report() {
    let dir = tempfile::tempdir().unwrap();
    train_small(
        dir.path(),
        &["--seed", "42", "--json", "report.json"],
        "model.sonn",
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["report"]["epochs"].as_array().unwrap().len(), 2);
    assert_eq!(report["run_config"]["seed"], 42);
    let ckpt = selfonn::model::load_checkpoint(dir.path().join("model.sonn")).unwrap();
    assert_eq!(ckpt.config(), &ModelConfig::reduced());
    let meta: serde_json::Value = serde_json::from_str(&ckpt.metadata).unwrap();
    assert_eq!(meta["run_config"], report["run_config"]);
}

#[test]
fn embedded_config_reproduces_checkpoint_in_f64() {
    let dir = tempfile::tempdir().unwrap();
    train_small(dir.path(), &["--f64", "--seed", "3"], "a.sonn");
    let ckpt = selfonn::model::load_checkpoint(dir.path().join("a.sonn")).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&ckpt.metadata).unwrap();
    std::fs::write(dir.path().join("run.json"), meta["run_config"].to_string()).unwrap();
    assert_ok(&selfonn(
        &[
            "train", "--config", "run.json", "--quiet", "--out", "b.sonn",
        ],
        dir.path(),
    ));
    let a = std::fs::read(dir.path().join("a.sonn")).unwrap();
    let b = std::fs::read(dir.path().join("b.sonn")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn inspect_reports_default_parameter_count() {
    let dir = tempfile::tempdir().unwrap();
    let p = ModelParameters::<f32>::init(&ModelConfig::default(), 1).unwrap();
    save_checkpoint(&p, dir.path().join("d.sonn"), "").unwrap();
    let o = selfonn(&["inspect", "d.sonn", "--json", "i.json"], dir.path());
    assert_ok(&o);
    assert!(stdout(&o).contains("parameters   259170"), "{}", stdout(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("i.json")).unwrap()).unwrap();
    assert_eq!(v["parameters"], 259170);
}

fn write_zero_model(dir: &Path) {
    let p = ModelParameters::<f32>::zeros(&ModelConfig::reduced()).unwrap();
    save_checkpoint(&p, dir.join("zero.sonn"), "").unwrap();
}

#[test]
fn infer_one_line_per_segment() {
    let dir = tempfile::tempdir().unwrap();
    let p = ModelParameters::<f32>::init(&ModelConfig::reduced(), 5).unwrap();
    save_checkpoint(&p, dir.path().join("m.sonn"), "").unwrap();
    let samples = (0..3 * 4096 + 100)
        .map(|i| (i as f32 * 0.37).sin())
        .collect();
    write_recording(
        dir.path().join("r.f32le"),
        &Recording::new(samples),
        selfonn::data::SampleFormat::F32le,
    )
    .unwrap();
    let a = selfonn(&["infer", "m.sonn", "r.f32le"], dir.path());
    assert_ok(&a);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    for (i, line) in lines.iter().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 4);
        assert_eq!(fields[0], i.to_string());
        assert!(fields[3] == "healthy" || fields[3] == "faulty");
    }
    let b = selfonn(&["infer", "m.sonn", "r.f32le"], dir.path());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn zero_model_on_silence_ties_to_faulty() {
    let dir = tempfile::tempdir().unwrap();
    write_zero_model(dir.path());
    std::fs::write(dir.path().join("silence.csv"), "0\n".repeat(4096)).unwrap();
    let o = selfonn(&["infer", "zero.sonn", "silence.csv"], dir.path());
    assert_ok(&o);
    assert_eq!(stdout(&o), "0 0.000000 0.000000 faulty\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write_zero_model(dir.path());

    std::fs::write(dir.path().join("short.csv"), "1\n2\n3\n").unwrap();
    let o = selfonn(&["infer", "zero.sonn", "short.csv"], dir.path());
    assert_eq!(o.status.code(), Some(3));

    let o = selfonn(&["train", "--manifest", "missing.csv"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.csv"));

    let o = selfonn(
        &[
            "evaluate",
            "zero.sonn",
            "--synth",
            "default",
            "--preset",
            "reduced",
            "--q-order",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(dir.path().join("bad.json"), "{\"seed\": \"x\"}").unwrap();
    let o = selfonn(
        &["train", "--config", "bad.json", "--synth", "default"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(dir.path().join("junk.sonn"), b"NOPE").unwrap();
    let o = selfonn(&["inspect", "junk.sonn"], dir.path());
    assert_eq!(o.status.code(), Some(3));

    let o = selfonn(
        &[
            "train",
            "--synth",
            "default",
            "--n-healthy",
            "3",
            "--n-faulty",
            "3",
            "--preset",
            "reduced",
            "--lr",
            "3e38",
            "--epochs",
            "3",
            "--quiet",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn evaluate_overfit_model_on_its_training_data() {
    let dir = tempfile::tempdir().unwrap();
    // Three-second recordings: validation windows share conditions with training windows.
    std::fs::write(
        dir.path().join("spec.json"),
        r#"{"n_healthy": 4, "n_faulty": 4, "duration_s": 3.0}"#,
    )
    .unwrap();
    assert_ok(&selfonn(
        &[
            "train",
            "--synth",
            "spec.json",
            "--preset",
            "reduced",
            "--lr",
            "1e-3",
            "--epochs",
            "40",
            "--patience",
            "40",
            "--seed",
            "1",
            "--quiet",
            "--out",
            "m.sonn",
        ],
        dir.path(),
    ));
    let o = selfonn(
        &[
            "evaluate",
            "m.sonn",
            "--synth",
            "spec.json",
            "--seed",
            "1",
            "--json",
            "ev.json",
            "--csv",
            "ev.csv",
        ],
        dir.path(),
    );
    assert_ok(&o);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ev.json")).unwrap())
            .unwrap();
    assert_eq!(v["pooled"]["accuracy"], 1.0, "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("ev.csv")).unwrap();
    assert!(csv.starts_with("machine,signal,sensor,tp,fp,fn,tn"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn bench_prints_latency() {
    let dir = tempfile::tempdir().unwrap();
    let o = selfonn(
        &[
            "bench", "--preset", "reduced", "--n", "2", "--json", "b.json",
        ],
        dir.path(),
    );
    assert_ok(&o);
    assert!(stdout(&o).contains("real-time factor"));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
    assert_eq!(v["stats"]["timings"], 2);
}
