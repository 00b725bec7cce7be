//! The committed mini corpus: regenerating it is byte-stable and the full
//! pipeline recovers its planted structure.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use quotus::cluster::{CitationEdge, QuoteCluster};
use quotus::dedup::DroppedArticle;
use quotus::pipeline::{run_stage, PipelineConfig, Stage, TokenVolumeTrack};
use quotus::records::{read_json, read_records};
use quotus::synth::corpus::{runs, Expected, MiniCorpus};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini")
}

fn records<T: serde::de::DeserializeOwned>(path: &Path) -> Vec<T> {
    read_records(path).unwrap().into_iter().map(|(_, r)| r).collect()
}

#[test]
fn regenerated_fixture_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let expected: Expected = read_json(&fixture().join("expected.json")).unwrap();
    MiniCorpus::generate(expected.seed).write(dir.path()).unwrap();
    for name in [
        "transcripts.jsonl",
        "outlets.jsonl",
        "articles.jsonl",
        "features.jsonl",
        "expected.json",
        "config.toml",
    ] {
        let fresh = std::fs::read(dir.path().join(name)).unwrap();
        let committed = std::fs::read(fixture().join(name)).unwrap();
        assert!(fresh == committed, "{name} differs from the committed fixture");
    }
}

#[test]
fn pipeline_recovers_planted_structure() {
    let work = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::load(&fixture().join("config.toml")).unwrap();
    cfg.paths.workdir = work.path().to_path_buf();
    for stage in Stage::ALL {
        run_stage(stage, &cfg).unwrap();
    }
    let expected: Expected = read_json(&fixture().join("expected.json")).unwrap();
    let wd = work.path();

    let dedup: Vec<DroppedArticle> = records(&wd.join("dedup.jsonl"));
    assert_eq!(dedup, expected.dedup);

    let clusters: Vec<QuoteCluster> = records(&wd.join("clusters.jsonl"));
    let edges: Vec<CitationEdge> = records(&wd.join("edges.jsonl"));
    assert_eq!(clusters.len(), expected.counts.clusters);
    let mut citing: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for e in &edges {
        citing.entry(&e.cluster_id).or_default().insert(&e.outlet_id);
    }
    let found: BTreeMap<&str, &QuoteCluster> = clusters.iter().map(|c| (c.cluster_id.as_str(), c)).collect();
    for want in &expected.clusters {
        let got = found[want.cluster_id.as_str()];
        assert_eq!(got.transcript_id, want.transcript_id);
        assert_eq!((got.span_start, got.span_end), (want.span_start, want.span_end));
        let outlets: Vec<&str> = citing[want.cluster_id.as_str()].iter().copied().collect();
        assert_eq!(outlets, want.citing_outlets, "citers of {}", want.cluster_id);
    }
    let matches = read_records::<serde_json::Value>(&wd.join("matches.jsonl")).unwrap();
    assert_eq!(matches.len(), expected.counts.matches);
    let occurrences = read_records::<serde_json::Value>(&wd.join("occurrences.jsonl")).unwrap();
    assert_eq!(occurrences.len(), expected.counts.occurrences);

    let mut edges = edges;
    edges.sort_by(|a, b| (&a.outlet_id, &a.cluster_id).cmp(&(&b.outlet_id, &b.cluster_id)));
    let mut want_edges = expected.edges.clone();
    want_edges.sort_by(|a, b| (&a.outlet_id, &a.cluster_id).cmp(&(&b.outlet_id, &b.cluster_id)));
    assert_eq!(edges, want_edges);

    let tracks: Vec<TokenVolumeTrack> = read_json(&wd.join("token_volume.json")).unwrap();
    assert_eq!(tracks.len(), expected.token_volume.len());
    for (got, want) in tracks.iter().zip(&expected.token_volume) {
        assert_eq!(got.transcript_id, want.transcript_id);
        assert_eq!(got.overall.len(), want.length);
        assert_eq!(runs(&got.overall), want.overall, "{}", want.transcript_id);
        let by: BTreeMap<_, _> = got.by_category.iter().map(|(l, v)| (*l, runs(v))).collect();
        assert_eq!(by, want.by_category, "{}", want.transcript_id);
    }
}

#[test]
fn latent_falls_back_to_zero_filled_for_rank_zero_model() {
    use quotus::complete::model_io::write_model;
    use quotus::complete::CompletionModel;

    let work = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::load(&fixture().join("config.toml")).unwrap();
    cfg.paths.workdir = work.path().to_path_buf();
    for stage in [Stage::Ingest, Stage::Match, Stage::Cluster, Stage::Graph, Stage::Complete] {
        run_stage(stage, &cfg).unwrap();
    }
    write_model(&work.path().join("model.txt"), &CompletionModel::zero(14, 48, 1.0, 0.0)).unwrap();
    run_stage(Stage::Latent, &cfg).unwrap();
    let summary: serde_json::Value = read_json(&work.path().join("latent.json")).unwrap();
    assert_eq!(summary["source"], "zero_filled");
    assert!(summary["rank"].as_u64().unwrap() > 0);
}
