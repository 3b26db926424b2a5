//! synth → featurize → train → segment → score through the binary, on a
//! corpus small enough for a test run.

use std::path::Path;
use std::process::Command;

use conseg::io::{parse_features_csv, parse_report_json, read_corpus};

fn conseg(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_conseg"))
        .args(args)
        .env("CONSEG_THREADS", "1")
        .output()
        .expect("spawning conseg");
    assert!(
        out.status.success(),
        "conseg {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn small_corpus_segments_held_out_videos() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let synth_cfg = d.join("synth.toml");
    std::fs::write(
        &synth_cfg,
        "num_videos = 32\ngestures_per_video = [2, 3]\ngap_length = [40, 70]\n",
    )
    .unwrap();
    let train_cfg = d.join("train.toml");
    std::fs::write(&train_cfg, "hidden_size = 32\nnum_layers = 2\nmax_epochs = 8\nseed = 3\n").unwrap();

    let (train_dir, held_dir) = (d.join("train"), d.join("held"));
    conseg(&["synth", "--config", path(&synth_cfg), "--out-dir", path(&train_dir), "--seed", "1"]);
    conseg(&["synth", "--config", path(&synth_cfg), "--out-dir", path(&held_dir), "--seed", "2"]);

    let held = read_corpus(&held_dir).unwrap();
    let first = held_dir.join("keypoints").join(format!("{}.csv", held[0].annotation.video_id()));
    let features = d.join("features.csv");
    conseg(&["featurize", "--keypoints", path(&first), "--out", path(&features)]);
    let seq = parse_features_csv(&std::fs::read_to_string(&features).unwrap()).unwrap();
    assert_eq!(seq.len(), held[0].frames.len());

    let model = d.join("model.bin");
    conseg(&["train", "--corpus", path(&train_dir), "--config", path(&train_cfg), "--out", path(&model)]);
    let pred = d.join("pred.txt");
    conseg(&["segment", "--model", path(&model), "--keypoints", path(&held_dir), "--out", path(&pred)]);
    let report = d.join("report.json");
    conseg(&[
        "score",
        "--pred",
        path(&pred),
        "--gt",
        path(&held_dir.join("annotations.txt")),
        "--out",
        path(&report),
    ]);
    let report = parse_report_json(&std::fs::read_to_string(&report).unwrap()).unwrap().report;
    assert_eq!(report.video_count, 32);
    let csr = report.csr_at(0.7).unwrap();
    assert!(csr >= 0.85, "held-out CSR@0.7 = {csr}");
}
