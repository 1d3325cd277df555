mod common;

use std::fs;
use std::process::Command;

fn topicscope(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_topicscope"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn stages_chain_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = common::write_thread_corpus(tmp.path(), 2, "");
    let cfg = cfg.to_str().unwrap();
    let path = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();

    let (ok, stdout, stderr) = topicscope(&[
        "preprocess",
        "--config",
        cfg,
        "--out",
        &path("prepared.json"),
    ]);
    assert!(ok, "{stderr}");
    assert!(stdout.contains("40 articles"), "{stdout}");

    let (ok, _, stderr) = topicscope(&[
        "sweep",
        "--config",
        cfg,
        "--prepared",
        &path("prepared.json"),
        "--parameter",
        "num_topics",
        "--values",
        "2,3,4",
        "--test",
        "--out",
        &path("sweep.csv"),
    ]);
    assert!(ok, "{stderr}");
    assert_eq!(
        fs::read_to_string(path("sweep.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );

    let (ok, stdout, stderr) = topicscope(&[
        "sweep",
        "--config",
        cfg,
        "--prepared",
        &path("prepared.json"),
        "--parameter",
        "iterations",
        "--values",
        "1,5,20",
        "--alt-num-topics",
        "4",
        "--out",
        &path("iters.csv"),
    ]);
    assert!(ok, "{stderr}");
    assert!(
        stdout.contains("pearson(train_cv at K=4, train_cv at K=4) = 1.000000"),
        "{stdout}"
    );

    let (ok, _, stderr) = topicscope(&[
        "train",
        "--config",
        cfg,
        "--prepared",
        &path("prepared.json"),
        "--num-topics",
        "3",
        "--out",
        &path("model.json"),
    ]);
    assert!(ok, "{stderr}");

    // The model has 3 topics; analysis only needs the model file.
    let (ok, _, stderr) = topicscope(&[
        "analyze",
        "--config",
        cfg,
        "--prepared",
        &path("prepared.json"),
        "--model",
        &path("model.json"),
        "--out-dir",
        &path("analysis"),
    ]);
    assert!(ok, "{stderr}");
    let terms = fs::read_to_string(tmp.path().join("analysis/topic_terms.csv")).unwrap();
    assert_eq!(terms.lines().count(), 1 + 3 * 7);

    let (ok, stdout, stderr) = topicscope(&[
        "inconsistency",
        "--config",
        cfg,
        "--prepared",
        &path("prepared.json"),
        "--model",
        &path("model.json"),
        "--out-dir",
        &path("analysis"),
    ]);
    assert!(ok, "{stderr}");
    assert!(stdout.contains("threads scored"), "{stdout}");
}

#[test]
fn pipeline_then_report_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = common::write_thread_corpus(tmp.path(), 6, "");
    let out = tmp.path().join("bundle");
    let (ok, stdout, stderr) = topicscope(&[
        "pipeline",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--seed",
        "9",
    ]);
    assert!(ok, "{stderr}");
    assert!(stdout.contains("7 artifacts"), "{stdout}");
    let manifest = out.join("manifest.json");
    let again = tmp.path().join("again");
    let (ok, stdout, stderr) = topicscope(&[
        "report",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out-dir",
        again.to_str().unwrap(),
    ]);
    assert!(ok, "{stderr}");
    assert_eq!(
        stdout.lines().filter(|l| l.starts_with("match")).count(),
        8,
        "{stdout}"
    );
    assert_eq!(
        fs::read(manifest).unwrap(),
        fs::read(again.join("manifest.json")).unwrap()
    );
}

#[test]
fn errors_exit_nonzero_with_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = common::write_thread_corpus(tmp.path(), 1, "");
    fs::remove_file(tmp.path().join("articles.jsonl")).unwrap();
    let out = tmp.path().join("never");
    let (ok, _, stderr) = topicscope(&[
        "pipeline",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(!ok);
    assert!(stderr.contains("error: preprocess:"), "{stderr}");
    assert!(!out.exists());

    let cfg = common::write_thread_corpus(tmp.path(), 1, "[lda]\nbogus = 1\n");
    let (ok, _, stderr) = topicscope(&[
        "preprocess",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("x.json").to_str().unwrap(),
    ]);
    assert!(!ok);
    assert!(stderr.contains("error"), "{stderr}");
}
