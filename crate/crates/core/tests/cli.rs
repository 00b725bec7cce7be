//! The `quotus` binary: flags, exit codes, stage ordering and outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini")
}

fn quotus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quotus")).args(args).output().unwrap()
}

fn on_fixture(stage: &str, workdir: &Path, extra: &[&str]) -> Output {
    let config = fixture().join("config.toml");
    let mut args = vec![stage, "--config", config.to_str().unwrap(), "--workdir", workdir.to_str().unwrap()];
    args.extend_from_slice(extra);
    quotus(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_lists_subcommands_and_flags() {
    let o = quotus(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for word in [
        "ingest", "match", "cluster", "graph", "describe", "surprise", "complete", "latent", "report", "all",
        "--config", "--seed", "--workdir",
    ] {
        assert!(text.contains(word), "help lacks {word}:\n{text}");
    }
}

#[test]
fn missing_config_is_a_validation_error() {
    let o = quotus(&["ingest"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = quotus(&["ingest", "--config", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.toml");
    std::fs::write(&cfg, "seed = 1\nseeed = 2\n").unwrap();
    let o = quotus(&["ingest", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seeed"), "{}", stderr(&o));
}

#[test]
fn malformed_input_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["transcripts.jsonl", "outlets.jsonl", "config.toml"] {
        std::fs::copy(fixture().join(f), dir.path().join(f)).unwrap();
    }
    std::fs::write(dir.path().join("features.jsonl"), "").unwrap();
    std::fs::write(dir.path().join("articles.jsonl"), "{\"id\": \"a1\", \"outlet_id\": \n").unwrap();
    let o = quotus(&["ingest", "--config", dir.path().join("config.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("articles.jsonl"), "{}", stderr(&o));
}

#[test]
fn stage_before_its_inputs_names_earliest_missing_stage() {
    let work = tempfile::tempdir().unwrap();
    let o = on_fixture("complete", work.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("requires: ingest"), "{}", stderr(&o));

    assert!(on_fixture("ingest", work.path(), &[]).status.success());
    assert!(on_fixture("match", work.path(), &[]).status.success());
    let o = on_fixture("complete", work.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("requires: cluster"), "{msg}");
    assert!(msg.contains("clusters.jsonl"), "{msg}");
}

#[test]
fn unwritable_workdir_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("not-a-directory");
    std::fs::write(&blocker, "").unwrap();
    let o = on_fixture("ingest", &blocker, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn seed_override_reaches_surprise_records() {
    let work = tempfile::tempdir().unwrap();
    for stage in ["ingest", "match", "cluster", "graph"] {
        assert!(on_fixture(stage, work.path(), &[]).status.success());
    }
    let o = on_fixture("surprise", work.path(), &["--seed", "777"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(work.path().join("surprise.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["seed"], 777);
}

#[test]
fn all_writes_report_and_summaries() {
    let work = tempfile::tempdir().unwrap();
    let o = on_fixture("all", work.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    for stage in ["ingest:", "match:", "cluster:", "graph:", "describe:", "surprise:", "complete:", "latent:", "report:"] {
        assert!(out.contains(stage), "no summary for {stage}:\n{out}");
    }
    assert!(out.contains("clusters=48"), "{out}");

    let html = std::fs::read_to_string(work.path().join("report.html")).unwrap();
    assert!(html.starts_with("<!DOCTYPE html>"));
    assert!(html.contains("<svg"));
    assert!(html.contains("t1:125-160"));

    let variants: Vec<serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(work.path().join("cluster_variants.json")).unwrap()).unwrap();
    assert_eq!(variants.len(), 48);
    let citing: Vec<usize> = variants.iter().map(|v| v["citing_outlets"].as_array().unwrap().len()).collect();
    assert!(citing.windows(2).all(|w| w[0] >= w[1]), "not sorted by citing outlets: {citing:?}");

    let scatter: Vec<serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(work.path().join("latent_scatter.json")).unwrap()).unwrap();
    assert!(scatter.iter().any(|p| p["kind"] == "outlet"));
    assert!(scatter.iter().any(|p| p["kind"] == "cluster"));
}
