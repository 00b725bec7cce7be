//! Stage-by-stage pipeline over a working directory of artifacts.
//!
//! Every stage reads the artifacts of earlier stages from the workdir and
//! writes its own; nothing is kept in memory between stages.

pub mod config;
mod report;
mod stages;
pub mod volume;

use std::fmt;
use std::path::{Path, PathBuf};

pub use config::PipelineConfig;
pub use report::{ClusterVariants, ScatterPoint, Variant};
pub use stages::{run_stage, GraphRecord, Summary};
pub use volume::{token_volume, TokenVolumeTrack};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Match,
    Cluster,
    Graph,
    Describe,
    Surprise,
    Complete,
    Latent,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Ingest,
        Stage::Match,
        Stage::Cluster,
        Stage::Graph,
        Stage::Describe,
        Stage::Surprise,
        Stage::Complete,
        Stage::Latent,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Match => "match",
            Stage::Cluster => "cluster",
            Stage::Graph => "graph",
            Stage::Describe => "describe",
            Stage::Surprise => "surprise",
            Stage::Complete => "complete",
            Stage::Latent => "latent",
            Stage::Report => "report",
        }
    }

    /// Stages whose artifacts this stage reads directly.
    pub fn requires(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Match => &[Stage::Ingest],
            Stage::Cluster => &[Stage::Match],
            Stage::Graph => &[Stage::Cluster],
            Stage::Describe => &[Stage::Cluster],
            Stage::Surprise | Stage::Complete => &[Stage::Graph],
            Stage::Latent => &[Stage::Complete],
            Stage::Report => &[Stage::Describe, Stage::Surprise, Stage::Latent],
        }
    }

    /// Files this stage writes into the workdir.
    pub fn artifacts(self) -> &'static [&'static str] {
        match self {
            Stage::Ingest => &[
                "transcripts.jsonl",
                "outlets.jsonl",
                "articles.jsonl",
                "dedup.jsonl",
                "mentions.jsonl",
                "ingest.json",
            ],
            Stage::Match => &["occurrences.jsonl", "matches.jsonl"],
            Stage::Cluster => &["clusters.jsonl", "edges.jsonl"],
            Stage::Graph => &["graph.json"],
            Stage::Describe => &["stats.jsonl", "stats_categories.jsonl"],
            Stage::Surprise => &["surprise.jsonl", "surprise_skipped.jsonl"],
            Stage::Complete => &["model.txt", "eval.json"],
            Stage::Latent => &["latent.json", "embeddings.jsonl", "correlations.jsonl", "rankings.json"],
            Stage::Report => &[
                "token_volume.json",
                "cluster_variants.json",
                "latent_scatter.json",
                "report.html",
            ],
        }
    }

    /// Every stage this one depends on, directly or not, in pipeline order.
    pub fn ancestors(self) -> Vec<Stage> {
        let mut out = Vec::new();
        let mut stack = self.requires().to_vec();
        while let Some(s) = stack.pop() {
            if !out.contains(&s) {
                out.push(s);
                stack.extend_from_slice(s.requires());
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Resolves artifact paths and enforces stage ordering.
#[derive(Debug, Clone)]
pub struct Workdir {
    root: PathBuf,
}

impl Workdir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workdir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, artifact: &str) -> PathBuf {
        self.root.join(artifact)
    }

    /// Fails with the earliest prerequisite stage whose artifacts are missing.
    pub fn check_ready(&self, stage: Stage) -> Result<()> {
        for s in stage.ancestors() {
            if let Some(missing) = s.artifacts().iter().find(|a| !self.path(a).is_file()) {
                return Err(Error::MissingStage {
                    stage: s.name(),
                    artifact: missing.to_string(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ancestors_are_transitive_and_ordered() {
        assert!(Stage::Ingest.ancestors().is_empty());
        assert_eq!(Stage::Complete.ancestors(), [Stage::Ingest, Stage::Match, Stage::Cluster, Stage::Graph]);
        assert_eq!(Stage::Report.ancestors(), &Stage::ALL[..8]);
    }

    #[test]
    fn earliest_missing_stage_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let wd = Workdir::new(dir.path());
        for s in [Stage::Ingest, Stage::Match] {
            for a in s.artifacts() {
                std::fs::write(wd.path(a), "").unwrap();
            }
        }
        let err = wd.check_ready(Stage::Complete).unwrap_err();
        assert_eq!(err.to_string(), "requires: cluster (missing artifact clusters.jsonl)");
        assert!(wd.check_ready(Stage::Cluster).is_ok());
    }
}
