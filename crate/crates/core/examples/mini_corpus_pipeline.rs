//! The whole pipeline on the synthetic mini corpus, from raw JSONL files to
//! the HTML report.
//!
//! ```text
//! cargo run --example mini_corpus_pipeline -- [OUTPUT_DIR]
//! ```
//!
//! Without an argument the files go to a temporary directory that is
//! removed at exit.

use std::path::PathBuf;

use quotus::pipeline::{run_stage, PipelineConfig, Stage};
use quotus::synth::corpus::MiniCorpus;

fn main() -> quotus::Result<()> {
    let temp = tempfile::tempdir().expect("temporary directory");
    let dir = std::env::args().nth(1).map_or_else(|| temp.path().to_path_buf(), PathBuf::from);

    let corpus = MiniCorpus::generate(20140106);
    corpus.write(&dir)?;
    let cfg = PipelineConfig::load(&dir.join("config.toml"))?;

    for stage in Stage::ALL {
        let summary = run_stage(stage, &cfg)?;
        let parts: Vec<String> = summary.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("{:<9} {}", stage.name(), parts.join(" "));
    }

    let c = &corpus.expected.counts;
    println!(
        "\nplanted: {} duplicates, {} matches, {} clusters, {} edges",
        c.duplicates, c.matches, c.clusters, c.edges
    );
    println!("report: {}", cfg.paths.workdir.join("report.html").display());
    Ok(())
}
