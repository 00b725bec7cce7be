//! Near-duplicate removal, quote matching and span clustering on the
//! synthetic mini corpus, checked against its planted ground truth.
//!
//! ```text
//! cargo run --example dedup_and_cluster
//! ```

use std::collections::BTreeSet;

use quotus::align::{extract_quotes, match_all, AlignmentParams};
use quotus::cluster::{cluster_matches, earliest_edges};
use quotus::corpus::{Transcript, TranscriptRecord};
use quotus::dedup::{dedup_articles, levenshtein, DedupParams};
use quotus::synth::corpus::{MiniCorpus, KEYWORD, SPEAKER};
use quotus::timestamp;
use quotus::tokenize::Tokenizer;

fn transcript(r: &TranscriptRecord, tok: &Tokenizer) -> Transcript {
    let turns = r.segments.iter().map(|s| (s.speaker.clone(), s.text.clone())).collect();
    Transcript::new(&r.id, timestamp::parse(&r.timestamp).unwrap(), turns, Some(SPEAKER), tok)
}

fn main() -> quotus::Result<()> {
    let corpus = MiniCorpus::generate(20140106);
    let tok = Tokenizer::default();
    let transcripts: Vec<Transcript> = corpus.transcripts.iter().map(|r| transcript(r, &tok)).collect();

    let relevant: Vec<_> = corpus.articles.iter().filter(|a| a.mentions(KEYWORD)).cloned().collect();
    let outcome = dedup_articles(&relevant, &DedupParams::default())?;
    println!(
        "{} articles, {} mention {KEYWORD:?}, {} kept after dedup",
        corpus.articles.len(),
        relevant.len(),
        outcome.kept.len()
    );
    let body = |id: &str| &corpus.articles.iter().find(|a| a.id == id).unwrap().body;
    for d in &outcome.dropped {
        let (a, b) = (body(&d.kept_id), body(&d.dropped_id));
        let dist = levenshtein(a, b) as f64 / a.chars().count().max(b.chars().count()) as f64;
        println!("  drop {} (copy of {}, distance to it {dist:.3})", d.dropped_id, d.kept_id);
    }
    assert_eq!(outcome.dropped, corpus.expected.dedup);

    let p = AlignmentParams::default();
    let occurrences: Vec<_> = outcome.kept.iter().flat_map(|a| extract_quotes(a, &tok, &p)).collect();
    let matches = match_all(&occurrences, &transcripts, &p);
    let clusters = cluster_matches(&matches, 5)?;
    let edges = earliest_edges(&clusters, &matches, &outcome.kept);
    println!(
        "{} quotes, {} matched, {} clusters, {} outlet-cluster edges",
        occurrences.len(),
        matches.len(),
        clusters.len(),
        edges.len()
    );

    for c in clusters.iter().filter(|c| c.transcript_id == "t1") {
        let words = &transcripts[0].tokens[c.span_start..c.span_end];
        println!(
            "  {:<12} {:>2} quotes  {} ...",
            c.cluster_id,
            c.member_occurrence_ids.len(),
            words[..6].join(" ")
        );
    }
    let ids: BTreeSet<_> = clusters.iter().map(|c| c.cluster_id.as_str()).collect();
    let planted: BTreeSet<_> = corpus.expected.clusters.iter().map(|c| c.cluster_id.as_str()).collect();
    println!("clusters agree with the planted spans: {}", ids == planted);
    Ok(())
}
