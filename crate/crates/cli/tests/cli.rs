mod common;

use std::fs;

use common::*;

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["predict", "--model", "m"]).status.code(), Some(1));
    assert_eq!(run(&["train", "--features", "f", "--model", "m", "--base", "svm"]).status.code(), Some(1));
    assert_eq!(run(&["--log-level", "loud", "extract", "--timelines", "t", "--out", "o"]).status.code(), Some(1));
    let r = run(&["ingest", "a.jsonl", "--window", "2024-03-01,2024-01-01", "--out", "o"]);
    assert_eq!(r.status.code(), Some(1));
    let r = run(&["ingest", "a.jsonl", "--window", "2024-01-01,2024-03-01", "--sample-rate", "1.5", "--out", "o"]);
    assert_eq!(r.status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = dir.path().join("out.csv");
    let r = run(&["extract", "--timelines", s(&missing), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));

    let corrupt = dir.path().join("corrupt.jsonl");
    fs::write(&corrupt, "garbage\nmore garbage\n{\"type\":\"PushEvent\"}\n").unwrap();
    let r = run(&["ingest", s(&corrupt), "--window", SYNTH_WINDOW, "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("corrupt archive"));


    let table = dir.path().join("features.csv");
    fs::write(&table, "login,f_login\nx,1\n").unwrap();
    let r = run(&["train", "--features", s(&table), "--model", s(&dir.path().join("m.json"))]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn extract_on_empty_timelines_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "").unwrap();
    let out = dir.path().join("features.csv");
    run_ok(&["extract", "--timelines", s(&empty), "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("login,f_login,"));
}

#[test]
fn every_run_prints_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "").unwrap();
    let out = dir.path().join("features.csv");
    let r = run_ok(&["--seed", "9", "extract", "--timelines", s(&empty), "--out", s(&out)]);
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("seed=9"), "{err}");
    assert!(err.contains("\"similarity\":\"tfidf\""), "{err}");
}

#[test]
fn round_trip_prints_auc_and_predict_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let features = small_pipeline(d, 120, 4);
    let grid = d.join("grid.json");
    fs::write(&grid, r#"{"n_trees": 20, "max_depth": [4, 8]}"#).unwrap();
    let model = d.join("model.json");
    let train = run_ok(&[
        "train", "--features", s(&features), "--model", s(&model), "--grid", s(&grid), "--folds", "3", "--repeats",
        "1", "--holdout", "0.25",
    ]);
    assert!(stdout(&train).contains("best:"));
    assert!(stdout(&train).contains("holdout"));
    let report = fs::read_to_string(d.join("model.json.cv.csv")).unwrap();
    assert_eq!(report.lines().count(), 3, "header + one row per combination");
    assert_eq!(report.lines().filter(|l| l.ends_with(",1")).count(), 1, "one best row");

    let eval = run_ok(&[
        "evaluate", "--model", s(&model), "--features", s(&features), "--out", s(&d.join("report.csv")), "--roc",
        s(&d.join("roc.csv")),
    ]);
    assert!(stdout(&eval).contains("AUC: "));
    let roc = fs::read_to_string(d.join("roc.csv")).unwrap();
    assert!(roc.starts_with("fpr,tpr,threshold\n0,0,inf\n"), "{roc}");

    let rows = fs::read_to_string(&features).unwrap().lines().count() - 1;
    let pred = d.join("pred.csv");
    run_ok(&["predict", "--model", s(&model), "--features", s(&features), "--out", s(&pred), "--threshold", "1.01"]);
    let text = fs::read_to_string(&pred).unwrap();
    assert_eq!(text.lines().count() - 1, rows);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("0")));
    run_ok(&["predict", "--model", s(&model), "--features", s(&features), "--out", s(&pred)]);
    let text = fs::read_to_string(&pred).unwrap();
    assert_eq!(text.lines().count() - 1, rows);
    assert!(text.lines().skip(1).any(|l| l.split(',').nth(1) == Some("1")));

    let r = run(&["predict", "--model", s(&model), "--features", s(&features), "--out", s(&pred), "--threshold", "NaN"]);
    assert_eq!(r.status.code(), Some(1));

    for method in ["permutation", "impurity", "chi2"] {
        let out = d.join(format!("imp-{method}.csv"));
        run_ok(&[
            "importance", "--model", s(&model), "--features", s(&features), "--method", method, "--repeats", "2", "--out",
            s(&out),
        ]);
        assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 18, "{method}");
    }
}

#[test]
fn impurity_needs_tree_members() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let features = small_pipeline(d, 60, 3);
    let model = d.join("knn.json");
    run_ok(&["train", "--features", s(&features), "--model", s(&model), "--base", "knn", "--folds", "2", "--repeats", "1"]);
    let r = run(&["importance", "--model", s(&model), "--features", s(&features), "--method", "impurity"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn sample_rate_keeps_active_accounts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = d.join("corpus");
    run_ok(&["synth", "--out", s(&corpus), "--humans", "60", "--bots-per-archetype", "2"]);
    let tl = d.join("tl.json");
    let r = run_ok(&[
        "ingest",
        s(&corpus.join("events.jsonl")),
        "--window",
        SYNTH_WINDOW,
        "--sample-rate",
        "0",
        "--active-threshold",
        "100",
        "--out",
        s(&tl),
    ]);
    let text = stdout(&r);
    assert!(text.contains("retained accounts:"), "{text}");
    let set: serde_json::Value = serde_json::from_str(&fs::read_to_string(&tl).unwrap()).unwrap();
    let kept = set["accounts"].as_array().unwrap();
    assert!(kept.len() < 68);
}
