//! Acceptance criterion 10: two identical dataset -> train -> certify ->
//! sweep pipeline runs produce bitwise-identical model JSON, certificate
//! JSON, and trajectory CSVs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn run_ok(cmd: &mut Command) {
    let out = cmd.output().expect("spawn scorepath");
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn pipeline(dir: &Path) {
    let bin = env!("CARGO_BIN_EXE_scorepath");
    run_ok(Command::new(bin).args(["dataset", "--out"]).arg(dir.join("ds")));

    let train_cfg = dir.join("train.json");
    fs::write(
        &train_cfg,
        format!(r#"{{"dataset": "{}"}}"#, dir.join("ds/dataset.csv").display()),
    )
    .unwrap();
    let model = dir.join("model.json");
    run_ok(Command::new(bin).args(["train", "--config"]).arg(&train_cfg).arg("--out").arg(&model));

    run_ok(
        Command::new(bin)
            .args(["certify", "--gamma", "1.0", "--alpha", "5e-5", "--score"])
            .arg(&model)
            .arg("--out")
            .arg(dir.join("cert.json")),
    );

    let sweep_cfg = dir.join("sweep.json");
    fs::write(
        &sweep_cfg,
        format!(r#"{{"score": {{"kind": "model", "path": "{}"}}}}"#, model.display()),
    )
    .unwrap();
    run_ok(
        Command::new(bin)
            .args(["sweep", "--config"])
            .arg(&sweep_cfg)
            .arg("--out")
            .arg(dir.join("sw")),
    );
}

fn sorted_files(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    out.sort();
    out
}

#[test]
fn criterion_10_pipeline_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    pipeline(&a);
    pipeline(&b);

    let mut compared = 0usize;
    let mut identical = true;
    let mut first_diff = String::new();
    let mut check = |pa: &Path, pb: &Path| {
        compared += 1;
        if fs::read(pa).unwrap() != fs::read(pb).unwrap() {
            identical = false;
            if first_diff.is_empty() {
                first_diff = pa.display().to_string();
            }
        }
    };
    check(&a.join("model.json"), &b.join("model.json"));
    check(&a.join("cert.json"), &b.join("cert.json"));
    let csvs_a = sorted_files(&a.join("sw"), "csv");
    let csvs_b = sorted_files(&b.join("sw"), "csv");
    assert_eq!(csvs_a.len(), csvs_b.len());
    for (pa, pb) in csvs_a.iter().zip(&csvs_b) {
        assert_eq!(pa.file_name(), pb.file_name());
        check(pa, pb);
    }

    // The default sweep exports 27 trajectories, one summary, two plots.
    assert_eq!(csvs_a.len(), 27, "expected 27 trajectory CSVs");
    assert_eq!(sorted_files(&a.join("sw"), "json").len(), 1);
    assert_eq!(sorted_files(&a.join("sw"), "svg").len(), 2);

    println!(
        "criterion 10: {} — {compared} artifacts bitwise-compared across two pipeline runs{}",
        if identical { "PASS" } else { "FAIL" },
        if identical { String::new() } else { format!(", first diff {first_diff}") }
    );
    assert!(identical, "criterion 10 failed: {first_diff} differs between runs");
}
