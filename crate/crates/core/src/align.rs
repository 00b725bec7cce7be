//! Quote extraction and approximate alignment of quotes to transcripts.
//!
//! Alignment is a semi-global Needleman-Wunsch over word tokens: every quote
//! token must be consumed, while transcript tokens before and after the
//! aligned span are free. The raw score is divided by the quote length, so
//! with unit edit costs a threshold of `-0.4` admits at most 0.4 edits per
//! quote word.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Article, Transcript};
use crate::error::{Error, Result};
use crate::timestamp::DAY;
use crate::tokenize::Tokenizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Stop at the newest candidate transcript that aligns.
    #[default]
    FirstAccept,
    /// Align against every candidate and keep the best score (newest wins ties).
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentParams {
    pub min_quote_words: usize,
    /// Candidate transcripts are at most this many seconds older than the article.
    pub max_lag_secs: i64,
    pub sim_threshold: f64,
    pub gap_penalty: f64,
    pub mismatch_penalty: f64,
    pub match_score: f64,
    pub search: SearchMode,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        AlignmentParams {
            min_quote_words: 6,
            max_lag_secs: 7 * DAY,
            sim_threshold: -0.4,
            gap_penalty: -1.0,
            mismatch_penalty: -1.0,
            match_score: 0.0,
            search: SearchMode::FirstAccept,
        }
    }
}

impl AlignmentParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.min_quote_words < 1 {
            return bad("min_quote_words must be at least 1");
        }
        if self.max_lag_secs <= 0 {
            return bad("max_lag must be positive");
        }
        if !(self.sim_threshold <= 0.0) {
            return bad("sim_threshold must be <= 0");
        }
        if !(self.gap_penalty <= 0.0 && self.mismatch_penalty <= 0.0 && self.match_score >= 0.0) {
            return bad("penalties must be <= 0 <= match_score");
        }
        Ok(())
    }
}

/// A quoted span found in an article body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteOccurrence {
    pub id: String,
    pub article_id: String,
    pub outlet_id: String,
    #[serde(with = "crate::timestamp::iso")]
    pub article_timestamp: i64,
    pub text: String,
    pub tokens: Vec<String>,
    /// Token range of the quote within the tokenized article body.
    pub article_span: (usize, usize),
}

/// An occurrence aligned to a transcript span `[span_start, span_end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteMatch {
    pub occurrence_id: String,
    pub article_id: String,
    pub outlet_id: String,
    pub transcript_id: String,
    pub span_start: usize,
    pub span_end: usize,
    pub score: f64,
    pub quote_text: String,
}

impl QuoteMatch {
    pub fn span(&self) -> Range<usize> {
        self.span_start..self.span_end
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub start: usize,
    pub end: usize,
    /// Raw DP score divided by the quote length.
    pub score: f64,
}

const OPEN: [char; 2] = ['"', '\u{201C}'];
const CLOSE: [char; 2] = ['"', '\u{201D}'];

/// Returns quoted spans of the article body in document order, dropping
/// spans shorter than `min_quote_words` tokens. An unclosed quote at the end
/// of the body is ignored with a warning.
pub fn extract_quotes(a: &Article, tok: &Tokenizer, p: &AlignmentParams) -> Vec<QuoteOccurrence> {
    let body = &a.body;
    let tokens = tok.tokenize_with_offsets(body);
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    let mut ordinal = 0;
    for (pos, c) in body.char_indices() {
        match open {
            None if OPEN.contains(&c) => open = Some(pos + c.len_utf8()),
            Some(start) if CLOSE.contains(&c) => {
                open = None;
                let first = tokens.partition_point(|t| t.bytes.start < start);
                let last = tokens.partition_point(|t| t.bytes.end <= pos);
                if last > first && last - first >= p.min_quote_words {
                    out.push(QuoteOccurrence {
                        id: format!("{}#{}", a.id, ordinal),
                        article_id: a.id.clone(),
                        outlet_id: a.outlet_id.clone(),
                        article_timestamp: a.timestamp,
                        text: body[start..pos].trim().to_string(),
                        tokens: tokens[first..last].iter().map(|t| t.text.clone()).collect(),
                        article_span: (first, last),
                    });
                    ordinal += 1;
                }
            }
            _ => {}
        }
    }
    if open.is_some() {
        log::warn!("article {}: unbalanced quotation mark, tail ignored", a.id);
    }
    out
}

#[derive(Clone, Copy)]
struct Cell {
    score: f64,
    start: usize,
}

impl Cell {
    // Higher score wins; equal scores keep the earlier start.
    fn better(self, other: Cell) -> Cell {
        if other.score > self.score || (other.score == self.score && other.start < self.start) {
            other
        } else {
            self
        }
    }
}

/// Semi-global alignment of `quote` inside `text` without thresholding.
///
/// Returns the best span with its normalized score. Among equally scored
/// spans the earliest start wins, then the shortest. Empty spans are never
/// returned.
pub fn best_alignment<T: PartialEq>(quote: &[T], text: &[T], p: &AlignmentParams) -> Option<Alignment> {
    if quote.is_empty() {
        return None;
    }
    let m = text.len();
    // row[j] = best over paths consuming quote[..i] and ending at text[..j].
    let mut prev: Vec<Cell> = (0..=m).map(|j| Cell { score: 0.0, start: j }).collect();
    let mut cur = prev.clone();
    for (i, q) in quote.iter().enumerate() {
        cur[0] = Cell {
            score: (i + 1) as f64 * p.gap_penalty,
            start: 0,
        };
        for j in 1..=m {
            let sub = if *q == text[j - 1] {
                p.match_score
            } else {
                p.mismatch_penalty
            };
            let diag = Cell {
                score: prev[j - 1].score + sub,
                start: prev[j - 1].start,
            };
            let up = Cell {
                score: prev[j].score + p.gap_penalty,
                start: prev[j].start,
            };
            let left = Cell {
                score: cur[j - 1].score + p.gap_penalty,
                start: cur[j - 1].start,
            };
            cur[j] = diag.better(up).better(left);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let mut best: Option<(Cell, usize)> = None;
    for (j, &c) in prev.iter().enumerate() {
        if c.start >= j {
            continue;
        }
        let take = match best {
            None => true,
            Some((b, _)) => c.score > b.score || (c.score == b.score && c.start < b.start),
        };
        if take {
            best = Some((c, j));
        }
    }
    best.map(|(c, end)| Alignment {
        start: c.start,
        end,
        score: c.score / quote.len() as f64,
    })
}

// Guards float round-off on boundary scores such as -4/10 versus -0.4.
const SCORE_EPS: f64 = 1e-12;

/// Aligns a tokenized quote against a transcript; `None` below threshold.
pub fn substring_align(q: &[String], tr: &Transcript, p: &AlignmentParams) -> Option<Alignment> {
    best_alignment(q, &tr.tokens, p).filter(|a| a.score >= p.sim_threshold - SCORE_EPS)
}

/// Transcripts ordered by time for windowed candidate lookup.
pub struct TranscriptIndex<'a> {
    sorted: Vec<&'a Transcript>,
}

impl<'a> TranscriptIndex<'a> {
    pub fn new(transcripts: &'a [Transcript]) -> Self {
        let mut sorted: Vec<&Transcript> = transcripts.iter().collect();
        sorted.sort_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
        TranscriptIndex { sorted }
    }

    /// Transcripts with `at - max_lag <= timestamp <= at`, newest first.
    pub fn candidates(&self, at: i64, max_lag: i64) -> impl Iterator<Item = &'a Transcript> + '_ {
        let lo = self.sorted.partition_point(|t| t.timestamp < at - max_lag);
        let hi = self.sorted.partition_point(|t| t.timestamp <= at);
        self.sorted[lo..hi].iter().rev().copied()
    }
}

pub fn match_occurrence(
    q: &QuoteOccurrence,
    index: &TranscriptIndex<'_>,
    p: &AlignmentParams,
) -> Option<QuoteMatch> {
    let mut best: Option<(&Transcript, Alignment)> = None;
    for tr in index.candidates(q.article_timestamp, p.max_lag_secs) {
        if let Some(al) = substring_align(&q.tokens, tr, p) {
            match p.search {
                SearchMode::FirstAccept => {
                    best = Some((tr, al));
                    break;
                }
                SearchMode::Exhaustive => {
                    if best.is_none_or(|(_, b)| al.score > b.score) {
                        best = Some((tr, al));
                    }
                }
            }
        }
    }
    best.map(|(tr, al)| QuoteMatch {
        occurrence_id: q.id.clone(),
        article_id: q.article_id.clone(),
        outlet_id: q.outlet_id.clone(),
        transcript_id: tr.id.clone(),
        span_start: al.start,
        span_end: al.end,
        score: al.score,
        quote_text: q.text.clone(),
    })
}

/// Matches all occurrences in parallel; output sorted by occurrence id.
pub fn match_all(
    occurrences: &[QuoteOccurrence],
    transcripts: &[Transcript],
    p: &AlignmentParams,
) -> Vec<QuoteMatch> {
    let index = TranscriptIndex::new(transcripts);
    let mut out: Vec<QuoteMatch> = occurrences
        .par_iter()
        .filter_map(|q| match_occurrence(q, &index, p))
        .collect();
    out.sort_by(|a, b| a.occurrence_id.cmp(&b.occurrence_id));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn transcript(id: &str, ts: i64, text: &str) -> Transcript {
        Transcript::new(
            id,
            ts,
            vec![("P".into(), text.into())],
            None,
            &Tokenizer::default(),
        )
    }

    fn article(body: &str) -> Article {
        Article {
            id: "a1".into(),
            outlet_id: "o1".into(),
            timestamp: 10 * DAY,
            title: "t".into(),
            url: "u".into(),
            body: body.into(),
        }
    }

    const SPEECH: &str = "so tonight i want to talk about what comes next and how we can \
        build an economy that works for everyone who is willing to work hard";

    #[test]
    fn params_validation() {
        assert!(AlignmentParams::default().validate().is_ok());
        let p = AlignmentParams {
            sim_threshold: 0.1,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn extracts_quotes_in_order() {
        let tok = Tokenizer::default();
        let p = AlignmentParams::default();
        let a = article(
            "He said \u{201C}one two three four five six\u{201D} and then \"a b c d e f g h i j\" twice.",
        );
        let qs = extract_quotes(&a, &tok, &p);
        assert_eq!(qs.len(), 2);
        assert_eq!(qs[0].tokens.len(), 6);
        assert_eq!(qs[1].tokens.len(), 10);
        assert_eq!(qs[0].article_span, (2, 8));
        assert_eq!(qs[1].article_span, (10, 20));
        assert_eq!(qs[1].id, "a1#1");
    }

    #[test]
    fn eight_word_quote_and_short_quote() {
        let tok = Tokenizer::default();
        let p = AlignmentParams::default();
        let qs = extract_quotes(&article("x \"we will get this done for you\" y"), &tok, &p);
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].tokens.len(), 7);
        let qs = extract_quotes(&article("a \"so-called reform\" or \"three word span\""), &tok, &p);
        assert!(qs.is_empty());
    }

    #[test]
    fn unbalanced_tail_ignored() {
        let tok = Tokenizer::default();
        let p = AlignmentParams::default();
        let qs = extract_quotes(
            &article("\"one two three four five six\" and \"seven eight nine ten eleven twelve"),
            &tok,
            &p,
        );
        assert_eq!(qs.len(), 1);
    }

    #[test]
    fn verbatim_quote_scores_zero() {
        let tr = transcript("t", 0, SPEECH);
        let q = words("how we can build an economy that works");
        let al = substring_align(&q, &tr, &AlignmentParams::default()).unwrap();
        assert_eq!((al.start, al.end, al.score), (11, 19, 0.0));
    }

    #[test]
    fn edit_budget() {
        let tr = transcript("t", 0, SPEECH);
        let p = AlignmentParams::default();
        // 10-token window "an economy ... willing" with 3 substitutions.
        let three = words("an ECONOMY that WORKS for everyone who IS willing to");
        let al = substring_align(&three, &tr, &p).unwrap();
        assert_eq!(al.score, -0.3);
        assert_eq!((al.start, al.end), (15, 25));
        let five = words("an ECONOMY THAT WORKS for EVERYONE who IS willing to");
        assert!(substring_align(&five, &tr, &p).is_none());
    }

    #[test]
    fn ties_prefer_earliest_then_shortest() {
        let p = AlignmentParams::default();
        let text = words("x a b x a b");
        let al = best_alignment(&words("a b"), &text, &p).unwrap();
        assert_eq!((al.start, al.end), (1, 3));
        // "a c" aligns with one edit to "a b" at 1..3, or to "a" at 1..2 with a
        // deleted quote token; the shorter span wins at equal start.
        let al = best_alignment(&words("a c"), &text, &p).unwrap();
        assert_eq!(al.score, -0.5);
        assert_eq!((al.start, al.end), (1, 2));
    }

    #[test]
    fn window_and_recency() {
        let p = AlignmentParams::default();
        let q_tokens = words("how we can build an economy that works");
        let occ = |ts| QuoteOccurrence {
            id: "a#0".into(),
            article_id: "a".into(),
            outlet_id: "o".into(),
            article_timestamp: ts,
            text: String::new(),
            tokens: q_tokens.clone(),
            article_span: (0, 8),
        };
        let old = vec![transcript("old", 0, SPEECH)];
        let idx = TranscriptIndex::new(&old);
        assert_eq!(match_occurrence(&occ(2 * DAY), &idx, &p).unwrap().transcript_id, "old");
        assert!(match_occurrence(&occ(8 * DAY), &idx, &p).is_none());

        let both = vec![transcript("d3", 7 * DAY, SPEECH), transcript("d1", 9 * DAY, SPEECH)];
        let idx = TranscriptIndex::new(&both);
        assert_eq!(match_occurrence(&occ(10 * DAY), &idx, &p).unwrap().transcript_id, "d1");
        // Transcripts after the article are never candidates.
        assert!(match_occurrence(&occ(6 * DAY), &idx, &p).is_none());
    }

    #[test]
    fn exhaustive_prefers_better_older_match() {
        let exact = "how we can build an economy that works";
        let near = "how we could build an economy that works";
        let ts = vec![transcript("older", 8 * DAY, exact), transcript("newer", 9 * DAY, near)];
        let idx = TranscriptIndex::new(&ts);
        let occ = QuoteOccurrence {
            id: "a#0".into(),
            article_id: "a".into(),
            outlet_id: "o".into(),
            article_timestamp: 10 * DAY,
            text: String::new(),
            tokens: words(exact),
            article_span: (0, 8),
        };
        let mut p = AlignmentParams::default();
        assert_eq!(match_occurrence(&occ, &idx, &p).unwrap().transcript_id, "newer");
        p.search = SearchMode::Exhaustive;
        assert_eq!(match_occurrence(&occ, &idx, &p).unwrap().transcript_id, "older");
    }
}
