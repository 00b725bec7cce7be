//! Writes the synthetic mini corpus with its expected pipeline outputs.
//!
//! ```text
//! cargo run --example make_fixture -- [DIR] [SEED]
//! ```
//!
//! Defaults regenerate the committed fixture `fixtures/mini` with seed 20140106.

use std::path::PathBuf;

use quotus::synth::corpus::MiniCorpus;

fn main() -> quotus::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini"));
    let seed = args.next().map_or(20140106, |s| s.parse().expect("seed must be an integer"));
    let corpus = MiniCorpus::generate(seed);
    corpus.write(&dir)?;
    let c = &corpus.expected.counts;
    println!(
        "{}: {} transcripts, {} outlets, {} articles ({} duplicates), {} matches, {} clusters, {} edges",
        dir.display(),
        c.transcripts,
        c.outlets,
        c.articles,
        c.duplicates,
        c.matches,
        c.clusters,
        c.edges
    );
    Ok(())
}
