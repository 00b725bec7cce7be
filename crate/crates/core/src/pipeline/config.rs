//! TOML pipeline configuration.
//!
//! Relative paths are resolved against the directory of the config file.
//! Every table rejects unknown keys. The top-level `seed` is required; stage
//! seeds default to fixed offsets from it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::align::{AlignmentParams, SearchMode};
use crate::bigraph::EnsembleParams;
use crate::cluster::DEFAULT_MIN_OVERLAP;
use crate::complete::SoftImputeParams;
use crate::dedup::DedupParams;
use crate::describe::DEFAULT_MIN_CITERS;
use crate::error::{Error, Result};
use crate::latent::LatentSource;
use crate::timestamp::DAY;
use crate::tokenize::Tokenizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub paths: Paths,
    #[serde(default)]
    pub corpus: CorpusConfig,
    #[serde(default)]
    pub tokenizer: Tokenizer,
    #[serde(default)]
    pub align: AlignConfig,
    #[serde(default)]
    pub dedup: DedupConfig,
    #[serde(default)]
    pub cluster: ClusterConfig,
    #[serde(default)]
    pub describe: DescribeConfig,
    #[serde(default)]
    pub surprise: SurpriseConfig,
    #[serde(default)]
    pub complete: CompleteConfig,
    #[serde(default)]
    pub latent: LatentConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub transcripts: PathBuf,
    pub articles: PathBuf,
    pub outlets: PathBuf,
    pub workdir: PathBuf,
    /// Per-cluster feature files (`{cluster_id, feature_name, value}` lines).
    #[serde(default)]
    pub features: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    /// Only turns by this speaker are tokenized for matching.
    pub speaker: Option<String>,
    /// Articles lacking this string in title and body are dropped.
    pub keyword: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlignConfig {
    pub min_quote_words: usize,
    pub max_lag_days: f64,
    pub sim_threshold: f64,
    pub gap_penalty: f64,
    pub mismatch_penalty: f64,
    pub match_score: f64,
    pub search: SearchMode,
}

impl Default for AlignConfig {
    fn default() -> Self {
        let p = AlignmentParams::default();
        AlignConfig {
            min_quote_words: p.min_quote_words,
            max_lag_days: p.max_lag_secs as f64 / DAY as f64,
            sim_threshold: p.sim_threshold,
            gap_penalty: p.gap_penalty,
            mismatch_penalty: p.mismatch_penalty,
            match_score: p.match_score,
            search: p.search,
        }
    }
}

impl AlignConfig {
    pub fn params(&self) -> AlignmentParams {
        AlignmentParams {
            min_quote_words: self.min_quote_words,
            max_lag_secs: (self.max_lag_days * DAY as f64).round() as i64,
            sim_threshold: self.sim_threshold,
            gap_penalty: self.gap_penalty,
            mismatch_penalty: self.mismatch_penalty,
            match_score: self.match_score,
            search: self.search,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DedupConfig {
    pub max_norm_distance: f64,
    pub window_days: f64,
    pub min_length_ratio: f64,
}

impl Default for DedupConfig {
    fn default() -> Self {
        let p = DedupParams::default();
        DedupConfig {
            max_norm_distance: p.max_norm_distance,
            window_days: p.window_secs as f64 / DAY as f64,
            min_length_ratio: p.min_length_ratio,
        }
    }
}

impl DedupConfig {
    pub fn params(&self) -> DedupParams {
        DedupParams {
            max_norm_distance: self.max_norm_distance,
            window_secs: (self.window_days * DAY as f64).round() as i64,
            min_length_ratio: self.min_length_ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    pub min_overlap: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            min_overlap: DEFAULT_MIN_OVERLAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DescribeConfig {
    /// Keyword for the mention fraction; falls back to `corpus.keyword`.
    pub keyword: Option<String>,
    pub min_citers: usize,
}

impl Default for DescribeConfig {
    fn default() -> Self {
        DescribeConfig {
            keyword: None,
            min_citers: DEFAULT_MIN_CITERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurpriseConfig {
    pub num_graphs: usize,
    pub swaps_per_edge: usize,
    /// Defaults to the top-level seed.
    pub seed: Option<u64>,
}

impl Default for SurpriseConfig {
    fn default() -> Self {
        SurpriseConfig {
            num_graphs: 200,
            swaps_per_edge: 10,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompleteConfig {
    /// Held-out entries; defaults to `holdout_fraction` of all positions.
    pub holdout_count: Option<usize>,
    pub holdout_fraction: f64,
    /// Defaults to the top-level seed plus one.
    pub holdout_seed: Option<u64>,
    /// λ values as fractions of the largest singular value of `P_Ω(X̃)`.
    pub lambda_fractions: Vec<f64>,
    /// Absolute λ values; when non-empty they replace `lambda_fractions`.
    pub lambdas: Vec<f64>,
    pub max_rank: Option<usize>,
    pub max_iters: usize,
    pub tol: f64,
    /// Defaults to the top-level seed plus two.
    pub solver_seed: Option<u64>,
}

impl Default for CompleteConfig {
    fn default() -> Self {
        CompleteConfig {
            holdout_count: None,
            holdout_fraction: 0.2,
            holdout_seed: None,
            lambda_fractions: crate::complete::geometric_grid(0.9, 0.05, 12),
            lambdas: Vec::new(),
            max_rank: Some(10),
            max_iters: 300,
            tol: 1e-6,
            solver_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatentConfig {
    pub dimensions: usize,
    pub source: LatentSource,
    /// Outlets listed at the top, middle and bottom of each ranking.
    pub rank_k: usize,
    /// Feature names with this prefix are topic weights.
    pub topic_prefix: String,
    pub topic_margin: f64,
    pub word_min_clusters: usize,
    pub word_max_clusters: usize,
}

impl Default for LatentConfig {
    fn default() -> Self {
        LatentConfig {
            dimensions: 3,
            source: LatentSource::Model,
            rank_k: 5,
            topic_prefix: "topic:".into(),
            topic_margin: 0.1,
            word_min_clusters: 3,
            word_max_clusters: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    pub title: String,
    /// Transcripts drawn as volume tracks, most cited first.
    pub max_tracks: usize,
    /// Clusters listed with their variants, most cited first.
    pub max_clusters: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            title: "Quote tracking report".into(),
            max_tracks: 6,
            max_clusters: 25,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut c: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.paths.resolve(base);
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        self.align.params().validate()?;
        self.dedup.params().validate()?;
        if self.cluster.min_overlap == 0 {
            return Err(Error::Config("cluster.min_overlap must be at least 1".into()));
        }
        if self.describe.min_citers < 2 {
            return Err(Error::Config("describe.min_citers must be at least 2".into()));
        }
        if self.surprise.num_graphs < 2 {
            return Err(Error::Config("surprise.num_graphs must be at least 2".into()));
        }
        if self.complete.lambdas.is_empty() && self.complete.lambda_fractions.is_empty() {
            return Err(Error::Config("complete needs lambdas or lambda_fractions".into()));
        }
        if self.complete.lambdas.iter().chain(&self.complete.lambda_fractions).any(|&l| !(l >= 0.0)) {
            return Err(Error::Config("lambda values must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.complete.holdout_fraction) {
            return Err(Error::Config("complete.holdout_fraction must lie in [0, 1)".into()));
        }
        if self.latent.dimensions == 0 {
            return Err(Error::Config("latent.dimensions must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks that every input file exists.
    pub fn check_inputs(&self) -> Result<()> {
        let p = &self.paths;
        for f in [&p.transcripts, &p.articles, &p.outlets].into_iter().chain(&p.features) {
            if !f.is_file() {
                return Err(Error::Config(format!("input file {} does not exist", f.display())));
            }
        }
        Ok(())
    }

    pub fn surprise_params(&self, num_edges: usize) -> EnsembleParams {
        EnsembleParams {
            num_graphs: self.surprise.num_graphs,
            swaps_per_graph: Some(self.surprise.swaps_per_edge * num_edges),
            seed: self.surprise.seed.unwrap_or(self.seed),
        }
    }

    pub fn holdout_count(&self, entries: usize) -> usize {
        self.complete
            .holdout_count
            .unwrap_or_else(|| (self.complete.holdout_fraction * entries as f64).round() as usize)
    }

    pub fn holdout_seed(&self) -> u64 {
        self.complete.holdout_seed.unwrap_or(self.seed.wrapping_add(1))
    }

    pub fn solver_params(&self) -> SoftImputeParams {
        SoftImputeParams {
            lambda: 0.0,
            max_rank: self.complete.max_rank,
            max_iters: self.complete.max_iters,
            tol: self.complete.tol,
            seed: self.complete.solver_seed.unwrap_or(self.seed.wrapping_add(2)),
        }
    }

    pub fn mention_keyword(&self) -> Option<&str> {
        self.describe.keyword.as_deref().or(self.corpus.keyword.as_deref())
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.transcripts);
        fix(&mut self.articles);
        fix(&mut self.outlets);
        fix(&mut self.workdir);
        self.features.iter_mut().for_each(fix);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
[paths]
transcripts = "t.jsonl"
articles = "a.jsonl"
outlets = "o.jsonl"
workdir = "work"
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = PipelineConfig::from_toml(MINIMAL, Path::new("/data")).unwrap();
        assert_eq!(c.paths.workdir, Path::new("/data/work"));
        assert_eq!(c.align.params(), AlignmentParams::default());
        assert_eq!(c.dedup.params(), DedupParams::default());
        assert_eq!(c.surprise_params(3).seed, 7);
        assert_eq!(c.surprise_params(3).swaps_per_graph, Some(30));
        assert_eq!(c.holdout_seed(), 8);
    }

    #[test]
    fn unknown_keys_and_missing_seed_are_rejected() {
        let err = PipelineConfig::from_toml(&format!("{MINIMAL}\n[align]\nbogus = 1\n"), Path::new(".")).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("bogus"));
        let err = PipelineConfig::from_toml(&MINIMAL.replace("seed = 7", ""), Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("seed"));
        let err = PipelineConfig::from_toml(&format!("extra = 1\n{MINIMAL}"), Path::new(".")).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let text = format!("{MINIMAL}\n[align]\nsim_threshold = 0.5\n");
        assert!(PipelineConfig::from_toml(&text, Path::new(".")).is_err());
    }
}
