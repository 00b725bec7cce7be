//! Extracts quotes from an article and aligns them to transcripts.
//!
//! Shows exact, paraphrased, too-short and unmatched quotes, and what the
//! per-token alignment score looks like for each.
//!
//! ```text
//! cargo run --example align_quotes
//! ```

use quotus::align::{best_alignment, extract_quotes, match_all, AlignmentParams};
use quotus::corpus::{Article, Transcript};
use quotus::timestamp::{self, DAY};
use quotus::tokenize::Tokenizer;

fn main() {
    let tok = Tokenizer::default();
    let p = AlignmentParams::default();
    let t0 = timestamp::parse("2014-01-06T18:00:00Z").unwrap();

    let transcript = Transcript::new(
        "t1",
        t0,
        vec![
            (
                "THE PRESIDENT".into(),
                "Good afternoon. We are not going to let a manufactured crisis stop the recovery. \
                 The budget I sent to Congress keeps every promise we made to working families."
                    .into(),
            ),
            ("Q".into(), "Mr. President, will you negotiate with the House leadership this week?".into()),
            (
                "THE PRESIDENT".into(),
                "I will talk to anybody who is serious, but I don't negotiate over the full faith and credit."
                    .into(),
            ),
        ],
        Some("THE PRESIDENT"),
        &tok,
    );
    println!("indexed transcript tokens: {}", transcript.tokens.len());

    let article = Article {
        id: "a1".into(),
        outlet_id: "o1".into(),
        timestamp: t0 + 5 * 3600,
        title: "President digs in".into(),
        url: "https://example.org/a1".into(),
        body: "The President said \"we are not going to let a manufactured crisis stop the recovery\" \
               and added \u{201C}I don't ever negotiate over the full faith and credit\u{201D}. \
               Aides called it \"a firm line\". A reporter asked \"will you negotiate with the House leadership\"."
            .into(),
    };

    let occurrences = extract_quotes(&article, &tok, &p);
    for q in &occurrences {
        let al = best_alignment(&q.tokens, &transcript.tokens, &p);
        match al {
            Some(al) => println!(
                "{:<6} span [{:>3}, {:>3})  score {:+.3}  \"{}\"",
                q.id, al.start, al.end, al.score, q.text
            ),
            None => println!("{:<6} no alignment  \"{}\"", q.id, q.text),
        }
    }

    let matches = match_all(&occurrences, std::slice::from_ref(&transcript), &p);
    println!(
        "\n{} of {} extracted quotes match (threshold {}):",
        matches.len(),
        occurrences.len(),
        p.sim_threshold
    );
    for m in &matches {
        println!("  {} -> {}[{}..{}]", m.occurrence_id, m.transcript_id, m.span_start, m.span_end);
    }

    // The same article published eight days later finds no candidate transcript.
    let late = Article {
        timestamp: t0 + 8 * DAY,
        ..article
    };
    let late_matches = match_all(&extract_quotes(&late, &tok, &p), &[transcript], &p);
    println!("published after the lag window: {} matches", late_matches.len());
}
