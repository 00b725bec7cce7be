//! Command-line front end for the staged pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::pipeline::{run_stage, PipelineConfig, Stage};

#[derive(Debug, Parser)]
#[command(name = "quotus", version, about = "Quote tracking and media bias analysis pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides the configured top-level seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Overrides the configured working directory.
    #[arg(long, global = true)]
    pub workdir: Option<PathBuf>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Load, keyword-filter and deduplicate the corpus.
    Ingest,
    /// Extract quotes and align them to transcripts.
    Match,
    /// Group matches into quote clusters and citation edges.
    Cluster,
    /// Build the outlet/cluster bipartite graph.
    Graph,
    /// Per-outlet descriptive statistics.
    Describe,
    /// Category surprise against the rewiring null model.
    Surprise,
    /// Baselines and matrix completion with held-out evaluation.
    Complete,
    /// Latent space, feature projections and outlet rankings.
    Latent,
    /// Token-volume tracks, cluster variants and the HTML report.
    Report,
    /// Every stage in order.
    All,
}

impl Command {
    pub fn stages(self) -> Vec<Stage> {
        match self {
            Command::Ingest => vec![Stage::Ingest],
            Command::Match => vec![Stage::Match],
            Command::Cluster => vec![Stage::Cluster],
            Command::Graph => vec![Stage::Graph],
            Command::Describe => vec![Stage::Describe],
            Command::Surprise => vec![Stage::Surprise],
            Command::Complete => vec![Stage::Complete],
            Command::Latent => vec![Stage::Latent],
            Command::Report => vec![Stage::Report],
            Command::All => Stage::ALL.to_vec(),
        }
    }
}

/// Loads the config and applies command-line overrides.
pub fn load_config(cli: &Cli) -> Result<PipelineConfig, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = &cli.workdir {
        cfg.paths.workdir = w.clone();
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    for stage in cli.command.stages() {
        let summary = run_stage(stage, &cfg)?;
        let counts: Vec<String> = summary.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("{stage}: {}", counts.join(" "));
    }
    Ok(())
}

/// Exit status: 0 on success, 1 for invalid input or usage, 2 for failures
/// during computation.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
