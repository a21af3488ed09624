#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_botsift"))
        .args(args)
        .output()
        .expect("spawn botsift")
}

/// Runs and panics with the captured output unless the exit code is 0.
pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "botsift {args:?}: exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn s(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

pub fn core_fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures/feature_oracle")
        .join(name)
}

pub const SYNTH_WINDOW: &str = "2024-01-01,2024-03-31";

/// synth -> ingest -> extract into `dir`; returns the labeled features path.
pub fn small_pipeline(dir: &Path, humans: usize, bots: usize) -> PathBuf {
    let corpus = dir.join("corpus");
    let timelines = dir.join("timelines.json");
    let features = dir.join("features.csv");
    let (h, b) = (humans.to_string(), bots.to_string());
    run_ok(&["synth", "--out", s(&corpus), "--humans", &h, "--bots-per-archetype", &b]);
    run_ok(&[
        "ingest",
        s(&corpus.join("events.jsonl")),
        "--profiles",
        s(&corpus.join("profiles.csv")),
        "--window",
        SYNTH_WINDOW,
        "--out",
        s(&timelines),
    ]);
    run_ok(&[
        "extract",
        "--timelines",
        s(&timelines),
        "--labels",
        s(&corpus.join("labels.csv")),
        "--out",
        s(&features),
    ]);
    features
}

/// Runs with `dir` as the working directory, so relative flags stay identical across reruns.
pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_botsift"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn botsift");
    assert!(
        out.status.success(),
        "botsift {args:?}: exit {:?}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}
