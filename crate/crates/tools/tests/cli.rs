mod common;

use std::path::Path;
use std::process::{Command, Output};

use gesturelog_core::dataset::{parse_landmark_jsonl, prototypes, write_landmark_jsonl, LandmarkSample};
use gesturelog_core::GestureClass;
use gesturelog_tools::preprocess::{read_manifest, MANIFEST_FILE};

fn gesturelog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gesturelog")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn ingest_synthetic_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for out in [&a, &b] {
        let o = gesturelog(&["--seed", "7", "ingest", "--format", "synthetic", "--per-class", "100", "--out", p(out)]);
        assert!(o.status.success(), "{o:?}");
        assert!(stdout(&o).starts_with("500 samples (fist=100 ok=100 stop=100 two_up=100 peace=100)"));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let samples = parse_landmark_jsonl(std::str::from_utf8(&bytes).unwrap()).unwrap();
    assert_eq!(samples.len(), 500);
}

#[test]
fn ingest_reports_malformed_line_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_landmark_jsonl(&[LandmarkSample {
        skeleton: prototypes()[0].1.clone(),
        gesture: GestureClass::Fist,
        source_id: "x".into(),
    }]);
    let short: Vec<[f64; 3]> = vec![[0.5, 0.5, 0.0]; 20];
    let bad = serde_json::json!({"gesture": "ok", "landmarks": short, "source_id": "y"}).to_string();
    let path = dir.path().join("d.jsonl");
    std::fs::write(&path, format!("{good}{bad}\n")).unwrap();

    let o = gesturelog(&["ingest", "--input", p(&path)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"), "{o:?}");

    let o = gesturelog(&["ingest", "--input", p(&dir.path().join("missing.jsonl"))]);
    assert_eq!(o.status.code(), Some(2));

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let o = gesturelog(&["ingest", "--input", p(&empty)]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("0 samples"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(gesturelog(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gesturelog(&["replay", "--speed", "fast"]).status.code(), Some(1));
    assert_eq!(gesturelog(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[training]\nlearning_rat = 1\n").unwrap();
    assert_eq!(gesturelog(&["--config", p(&cfg), "ingest", "--format", "synthetic"]).status.code(), Some(1));
    assert_eq!(gesturelog(&["--config", p(&dir.path().join("nope.toml")), "ingest", "--format", "synthetic"]).status.code(), Some(2));
}

#[test]
fn preprocess_is_deterministic_and_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    let o = gesturelog(&["--seed", "3", "ingest", "--format", "synthetic", "--per-class", "4", "--out", p(&data)]);
    assert!(o.status.success());

    let run = |out: &Path| {
        let o = gesturelog(&["preprocess", "--data", p(&data), "--style", "type2", "--out-dir", p(out)]);
        assert!(o.status.success(), "{o:?}");
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&a);
    run(&b);

    let manifest = std::fs::read(a.join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest, std::fs::read(b.join(MANIFEST_FILE)).unwrap());
    let entries = read_manifest(&manifest).unwrap();
    assert_eq!(entries.len(), 20);
    for e in &entries {
        assert!(e.path.ends_with("_type2.png"));
        assert_eq!(std::fs::read(a.join(&e.path)).unwrap(), std::fs::read(b.join(&e.path)).unwrap());
    }

    // (source_id, gesture) pairs survive ingest -> preprocess -> manifest
    let samples = parse_landmark_jsonl(&std::fs::read_to_string(&data).unwrap()).unwrap();
    let mut want: Vec<_> = samples.iter().map(|s| (s.source_id.clone(), s.gesture)).collect();
    want.sort();
    let got: Vec<_> = entries.iter().map(|e| (e.source_id.clone(), e.gesture)).collect();
    assert_eq!(got, want);
}

#[test]
fn preprocess_empty_dataset_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("empty.jsonl");
    std::fs::write(&data, "").unwrap();
    let out = dir.path().join("out");
    let o = gesturelog(&["preprocess", "--data", p(&data), "--out-dir", p(&out)]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 0);
}

#[test]
fn train_twice_gives_identical_report_and_eval_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[training]\nmax_epochs = 30\n[synthetic]\nper_class = 40\n").unwrap();
    let mut reports = Vec::new();
    for k in 0..2 {
        let model = dir.path().join(format!("m{k}.hlm"));
        let report = dir.path().join(format!("r{k}.json"));
        let o = gesturelog(&[
            "--config", p(&cfg), "--seed", "5", "train", "--model-out", p(&model), "--report-out", p(&report),
        ]);
        assert!(o.status.success(), "{o:?}");
        assert!(stdout(&o).contains("macro f1"));
        reports.push((std::fs::read(&report).unwrap(), std::fs::read(&model).unwrap()));
    }
    assert_eq!(reports[0], reports[1]);
    let report: serde_json::Value = serde_json::from_slice(&reports[0].0).unwrap();
    assert_eq!(report["split"], serde_json::json!({"train": 140, "val": 30, "test": 30}));
    assert_eq!(report["test"]["averaging"], "macro");

    let o = gesturelog(&["--config", p(&cfg), "eval", "--model", p(&dir.path().join("m0.hlm")), "--json"]);
    assert!(o.status.success(), "{o:?}");
    let eval: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(eval["n_samples"], 200);

    let junk = dir.path().join("junk.hlm");
    std::fs::write(&junk, b"not a model").unwrap();
    assert_eq!(gesturelog(&["eval", "--model", p(&junk)]).status.code(), Some(1));
}

#[test]
fn train_one_class_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    let samples: Vec<LandmarkSample> = (0..10)
        .map(|i| LandmarkSample { skeleton: prototypes()[1].1.clone(), gesture: GestureClass::Ok, source_id: format!("s{i}") })
        .collect();
    std::fs::write(&data, write_landmark_jsonl(&samples)).unwrap();
    let o = gesturelog(&["train", "--data", p(&data), "--model-out", p(&dir.path().join("m")), "--report-out", p(&dir.path().join("r"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("insufficient data"));
}

#[test]
fn report_renders_summary_file() {
    let dir = tempfile::tempdir().unwrap();
    let summary = serde_json::json!({
        "total_annotated_ms": 4000,
        "labels": [
            {"label": "boring", "gesture": "fist", "total_duration_ms": 1000, "count": 1, "share": 0.25},
            {"label": "fun", "gesture": "peace", "total_duration_ms": 3000, "count": 1, "share": 0.75}
        ],
        "timeline": []
    });
    let path = dir.path().join("s.json");
    std::fs::write(&path, summary.to_string()).unwrap();
    let o = gesturelog(&["report", "--summary", p(&path)]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("25.0%") && text.contains("75.0%"), "{text}");
}

#[test]
fn replay_against_dead_server_is_network_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    let o = gesturelog(&["replay", "--server", &url, "--trace", p(&common::fixture("five_fist_trace.json"))]);
    assert_eq!(o.status.code(), Some(2), "{o:?}");
}

#[test]
fn serve_and_replay_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.hlm");
    std::fs::write(&model, gesturelog_core::model_file::encode(&common::fist_model())).unwrap();
    let port = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let logs = dir.path().join("logs");
    let mut server = Command::new(env!("CARGO_BIN_EXE_gesturelog"))
        .args(["serve", "--model", p(&model), "--log-dir", p(&logs)])
        .env("GESTURELOG_PORT", port.to_string())
        .env("RUST_LOG", "warn")
        .spawn()
        .unwrap();
    let url = format!("http://127.0.0.1:{port}");
    let up = (0..100).any(|_| {
        std::thread::sleep(std::time::Duration::from_millis(50));
        std::net::TcpStream::connect(("127.0.0.1", port)).is_ok()
    });
    assert!(up, "server did not start");

    let csv = dir.path().join("out.csv");
    let report = dir.path().join("replay.json");
    let o = gesturelog(&[
        "replay", "--server", &url, "--trace", p(&common::fixture("five_fist_trace.json")),
        "--map", "fist=boring", "--csv-out", p(&csv), "--report-out", p(&report),
    ]);
    server.kill().ok();
    server.wait().ok();
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.ends_with(",0,133,133,0.9000,5\n"), "{text}");
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["frames_sent"], 5);
    let journals: Vec<_> = std::fs::read_dir(&logs).unwrap().collect();
    assert_eq!(journals.len(), 1);
}
