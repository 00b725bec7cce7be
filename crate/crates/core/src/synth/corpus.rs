//! A small synthetic news corpus with planted ground truth.
//!
//! Six press-conference transcripts, fourteen outlets and a few hundred
//! articles. Quotes are copied from fixed transcript spans, sometimes with
//! a word substituted, dropped or inserted, sometimes shortened. Some
//! articles are wire copies of others (one level or chained), some quote
//! too late, quote a reporter, or never mention the keyword. Everything the
//! pipeline should recover (duplicates, clusters, edges, token volumes) is
//! derived here from the plan, not by running the pipeline.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_id, CitationEdge};
use crate::corpus::{Article, Label, Outlet, SegmentRecord, TranscriptRecord};
use crate::dedup::DroppedArticle;
use crate::error::{Error, Result};
use crate::latent::FeatureRecord;
use crate::records::{write_json, write_records};
use crate::timestamp::{self, DAY};

pub const SPEAKER: &str = "THE PRESIDENT";
pub const KEYWORD: &str = "President";

const HOUR: i64 = 3600;
/// 2014-01-06T18:00:00Z.
const START: i64 = 1_389_031_200;
const TRANSCRIPTS: usize = 6;
const TURN_TOKENS: usize = 120;
const TURNS: usize = 3;

/// Planted spans in speaker-token coordinates. Spans 3 and 4 overlap by six
/// tokens, spans 5 and 6 by four.
const SPANS: [(usize, usize); 9] = [
    (5, 25),
    (40, 55),
    (80, 100),
    (125, 145),
    (139, 160),
    (175, 190),
    (186, 200),
    (250, 268),
    (290, 310),
];
/// Pairs of planted spans that form one cluster when both are cited.
const MERGED: [(usize, usize); 1] = [(3, 4)];
/// Spans that get at least two citations in every transcript.
const FORCED: [usize; 4] = [3, 4, 5, 6];

const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "ren", "tas", "vo", "pel", "dun", "sor", "fi", "gar", "ne", "thu", "bel", "cor", "da",
];

const FILLER: [&str; 96] = [
    "the", "a", "of", "and", "to", "in", "on", "for", "with", "that", "this", "was", "were", "has", "have",
    "will", "would", "could", "said", "says", "told", "reporters", "officials", "week", "day", "morning",
    "evening", "plan", "bill", "budget", "senate", "house", "vote", "leaders", "members", "critics",
    "supporters", "policy", "program", "economy", "jobs", "workers", "families", "state", "city", "country",
    "government", "agency", "office", "report", "statement", "speech", "event", "meeting", "campaign",
    "election", "issue", "question", "answer", "many", "some", "most", "few", "new", "old", "early", "late",
    "after", "before", "during", "while", "about", "over", "under", "between", "again", "still", "also",
    "even", "just", "more", "less", "than", "then", "when", "where", "which", "who", "their", "its", "our",
    "they", "we", "it", "he", "she",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Exact,
    Substitution,
    Deletion,
    Insertion,
    /// A shorter run of tokens strictly inside the span.
    Shortened,
}

/// A quote of a planted span inside a regular (kept, matched) article.
#[derive(Debug, Clone, PartialEq)]
struct Citation {
    transcript: usize,
    span: usize,
    outlet: usize,
    kind: VariantKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedCluster {
    pub cluster_id: String,
    pub transcript_id: String,
    pub span_start: usize,
    pub span_end: usize,
    pub citing_outlets: Vec<String>,
}

/// `[start, end, count]` runs of a token-volume track, zero runs omitted.
pub type Runs = Vec<(usize, usize, u32)>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedVolume {
    pub transcript_id: String,
    pub length: usize,
    pub overall: Runs,
    pub by_category: BTreeMap<Label, Runs>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedCounts {
    pub transcripts: usize,
    pub outlets: usize,
    pub articles: usize,
    pub with_keyword: usize,
    pub kept: usize,
    pub duplicates: usize,
    pub occurrences: usize,
    pub matches: usize,
    pub clusters: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub seed: u64,
    pub counts: ExpectedCounts,
    pub dedup: Vec<DroppedArticle>,
    pub clusters: Vec<ExpectedCluster>,
    pub edges: Vec<CitationEdge>,
    pub token_volume: Vec<ExpectedVolume>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiniCorpus {
    pub transcripts: Vec<TranscriptRecord>,
    pub outlets: Vec<Outlet>,
    pub articles: Vec<Article>,
    pub features: Vec<FeatureRecord>,
    pub expected: Expected,
}

/// Run-length encoding of the non-zero stretches of a track.
pub fn runs(track: &[u32]) -> Runs {
    let mut out = Vec::new();
    let mut i = 0;
    while i < track.len() {
        let v = track[i];
        let mut j = i + 1;
        while j < track.len() && track[j] == v {
            j += 1;
        }
        if v > 0 {
            out.push((i, j, v));
        }
        i = j;
    }
    out
}

/// Plain quadratic edit distance over characters.
fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn norm_distance(a: &str, b: &str) -> f64 {
    let long = a.chars().count().max(b.chars().count()).max(1);
    edit_distance(a, b) as f64 / long as f64
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

/// Words as sentences of 9 to 14 words.
fn sentences(words: &[String], rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    let mut left = 0;
    for (i, w) in words.iter().enumerate() {
        if left == 0 {
            left = rng.random_range(9..=14);
            if i > 0 {
                out.push_str(". ");
            }
            out.push_str(&capitalize(w));
        } else {
            out.push(' ');
            out.push_str(w);
        }
        left -= 1;
    }
    if !words.is_empty() {
        out.push('.');
    }
    out
}

fn filler(rng: &mut ChaCha8Rng, len: std::ops::Range<usize>) -> Vec<String> {
    let n = rng.random_range(len);
    (0..n).map(|_| FILLER.choose(rng).unwrap().to_string()).collect()
}

/// Article body pieces: filler text and quotations, kept apart so wire
/// copies can edit the filler only.
#[derive(Debug, Clone)]
enum Piece {
    Text(Vec<String>),
    Quote(String),
}

fn render(pieces: &[Piece], rng: &mut ChaCha8Rng) -> String {
    let mut parts = Vec::new();
    for p in pieces {
        match p {
            Piece::Text(w) => parts.push(sentences(w, rng)),
            Piece::Quote(q) => parts.push(format!("\"{q}\"")),
        }
    }
    parts.join(" ")
}

struct Draft {
    outlet: usize,
    timestamp: i64,
    title: String,
    pieces: Vec<Piece>,
    /// Render seed, so copies re-render their filler identically.
    style: u64,
    citations: Vec<Citation>,
    role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Regular,
    /// Copy of the draft with this index.
    Copy(usize),
    Other,
}

impl Draft {
    fn body(&self) -> String {
        render(&self.pieces, &mut ChaCha8Rng::seed_from_u64(self.style))
    }
}

struct Plan {
    words: Vec<Vec<String>>,
    records: Vec<TranscriptRecord>,
}

fn transcripts(rng: &mut ChaCha8Rng) -> Plan {
    let mut vocab: Vec<String> = Vec::new();
    for a in SYLLABLES {
        for b in SYLLABLES {
            for c in SYLLABLES {
                vocab.push(format!("{a}{b}{c}"));
            }
        }
    }
    let mut words = Vec::new();
    let mut records = Vec::new();
    for t in 0..TRANSCRIPTS {
        let pick: Vec<String> = vocab
            .choose_multiple(rng, TURNS * TURN_TOKENS + 60)
            .cloned()
            .collect();
        let (speech, questions) = pick.split_at(TURNS * TURN_TOKENS);
        let mut speech = speech.to_vec();
        // A negation inside some spans, at a fixed interior offset.
        for &(a, _) in &SPANS {
            if rng.random_bool(0.4) {
                speech[a + 3] = ["not", "don't", "can't", "won't"].choose(rng).unwrap().to_string();
            }
        }
        let mut segments = Vec::new();
        for turn in 0..TURNS {
            segments.push(SegmentRecord {
                speaker: SPEAKER.into(),
                text: sentences(&speech[turn * TURN_TOKENS..(turn + 1) * TURN_TOKENS], rng),
            });
            if turn + 1 < TURNS {
                segments.push(SegmentRecord {
                    speaker: "Q".into(),
                    text: sentences(&questions[turn * 20..(turn + 1) * 20], rng),
                });
            }
        }
        records.push(TranscriptRecord {
            id: format!("t{}", t + 1),
            timestamp: timestamp::format(START + 3 * DAY * t as i64),
            segments,
        });
        let mut all = speech;
        all.extend(questions.iter().cloned());
        words.push(all);
    }
    Plan { words, records }
}

fn outlets() -> Vec<Outlet> {
    let plan: [(Label, &str); 14] = [
        (Label::DeclaredConservative, "eagle-tribune"),
        (Label::DeclaredConservative, "liberty-daily"),
        (Label::DeclaredConservative, "heartland-post"),
        (Label::SuspectedConservative, "county-ledger"),
        (Label::SuspectedConservative, "frontier-herald"),
        (Label::SuspectedConservative, "ridge-courier"),
        (Label::SuspectedLiberal, "harbor-review"),
        (Label::SuspectedLiberal, "metro-dispatch"),
        (Label::SuspectedLiberal, "valley-times"),
        (Label::DeclaredLiberal, "progress-journal"),
        (Label::DeclaredLiberal, "commons-voice"),
        (Label::DeclaredLiberal, "new-horizon"),
        (Label::Unlabeled, "wire-digest"),
        (Label::Unlabeled, "capital-brief"),
    ];
    plan.iter()
        .enumerate()
        .map(|(i, &(label, name))| Outlet {
            id: format!("o{:02}", i + 1),
            domain: format!("{name}.example"),
            label,
        })
        .collect()
}

fn side(l: Label) -> i8 {
    match l {
        Label::DeclaredConservative | Label::SuspectedConservative => 1,
        Label::DeclaredLiberal | Label::SuspectedLiberal => -1,
        Label::Unlabeled => 0,
    }
}

fn cite_probability(label: Label, lean: i8) -> f64 {
    let strong = matches!(label, Label::DeclaredConservative | Label::DeclaredLiberal);
    match (side(label), lean) {
        (0, _) | (_, 0) => 0.3,
        (s, l) if s == l => {
            if strong {
                0.65
            } else {
                0.45
            }
        }
        _ => {
            if strong {
                0.08
            } else {
                0.18
            }
        }
    }
}

/// The quoted words for a citation.
fn quote_words(c: &Citation, words: &[String], rng: &mut ChaCha8Rng) -> Vec<String> {
    let (a, b) = SPANS[c.span];
    let span = &words[a..b];
    let interior = |rng: &mut ChaCha8Rng| rng.random_range(2..span.len() - 2);
    let other = |rng: &mut ChaCha8Rng| FILLER.choose(rng).unwrap().to_string();
    match c.kind {
        VariantKind::Exact => span.to_vec(),
        VariantKind::Substitution => {
            let mut q = span.to_vec();
            let p = interior(rng);
            q[p] = other(rng);
            q
        }
        VariantKind::Deletion => {
            let mut q = span.to_vec();
            q.remove(interior(rng));
            q
        }
        VariantKind::Insertion => {
            let mut q = span.to_vec();
            let p = interior(rng);
            q.insert(p, other(rng));
            q
        }
        VariantKind::Shortened => {
            let off = rng.random_range(1..=span.len() - 9);
            span[off..off + 8].to_vec()
        }
    }
}

impl MiniCorpus {
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = transcripts(&mut rng);
        let outlets = outlets();
        let t_time = |t: usize| START + 3 * DAY * t as i64;

        // Who cites what.
        let leans: Vec<Vec<i8>> = (0..TRANSCRIPTS)
            .map(|_| SPANS.iter().map(|_| [-1i8, 0, 1].choose(&mut rng).copied().unwrap()).collect())
            .collect();
        let mut cites: Vec<Vec<BTreeSet<usize>>> = vec![vec![BTreeSet::new(); SPANS.len()]; TRANSCRIPTS];
        for (t, spans) in cites.iter_mut().enumerate() {
            for (s, citers) in spans.iter_mut().enumerate() {
                for (o, outlet) in outlets.iter().enumerate() {
                    if rng.random_bool(cite_probability(outlet.label, leans[t][s])) {
                        citers.insert(o);
                    }
                }
                if FORCED.contains(&s) {
                    while citers.len() < 2 {
                        citers.insert(rng.random_range(0..outlets.len()));
                    }
                }
            }
        }

        // Regular articles: an outlet's citations of one transcript in
        // groups of at most two. The first citation of every span is exact.
        let mut drafts: Vec<Draft> = Vec::new();
        for t in 0..TRANSCRIPTS {
            let mut exact_done = [false; SPANS.len()];
            for o in 0..outlets.len() {
                let mut mine: Vec<usize> = (0..SPANS.len()).filter(|&s| cites[t][s].contains(&o)).collect();
                mine.shuffle(&mut rng);
                for group in mine.chunks(2) {
                    let mut citations = Vec::new();
                    let mut pieces = vec![Piece::Text({
                        let mut w = filler(&mut rng, 30..50);
                        w.insert(rng.random_range(0..w.len()), KEYWORD.to_string());
                        w
                    })];
                    for &s in group {
                        let (a, b) = SPANS[s];
                        let kind = if !exact_done[s] {
                            exact_done[s] = true;
                            VariantKind::Exact
                        } else {
                            let r: f64 = rng.random();
                            match r {
                                r if r < 0.5 => VariantKind::Exact,
                                r if r < 0.65 => VariantKind::Substitution,
                                r if r < 0.75 => VariantKind::Deletion,
                                r if r < 0.85 => VariantKind::Insertion,
                                _ if b - a >= 15 => VariantKind::Shortened,
                                _ => VariantKind::Exact,
                            }
                        };
                        let c = Citation {
                            transcript: t,
                            span: s,
                            outlet: o,
                            kind,
                        };
                        let q = quote_words(&c, &plan.words[t], &mut rng);
                        pieces.push(Piece::Quote(q.join(" ")));
                        pieces.push(Piece::Text(filler(&mut rng, 25..40)));
                        citations.push(c);
                    }
                    drafts.push(Draft {
                        outlet: o,
                        timestamp: t_time(t) + rng.random_range(2 * 60..90 * 60) * 60,
                        title: format!("{KEYWORD} speaks on {}", FILLER.choose(&mut rng).unwrap()),
                        pieces,
                        style: rng.random(),
                        citations,
                        role: Role::Regular,
                    });
                }
            }
        }
        let regular = drafts.len();

        // Articles that must not produce matches.
        for t in 0..TRANSCRIPTS {
            let words = &plan.words[t];
            let speech = TURNS * TURN_TOKENS;
            let others: [(Vec<String>, i64, bool); 5] = [
                // Stale: quoted after the matching window closed.
                (words[SPANS[0].0..SPANS[0].1].to_vec(), 8 * DAY + rng.random_range(0..48) * HOUR, true),
                // The reporter's words, not the speaker's.
                (words[speech + 2..speech + 12].to_vec(), rng.random_range(3..48) * HOUR, true),
                // Made-up words.
                (
                    (0..10).map(|_| format!("{}{}", SYLLABLES.choose(&mut rng).unwrap(), "x")).collect(),
                    rng.random_range(3..48) * HOUR,
                    true,
                ),
                // Too short to count as a quote.
                (words[SPANS[1].0..SPANS[1].0 + 3].to_vec(), rng.random_range(3..48) * HOUR, true),
                // Never mentions the keyword, so it is filtered out.
                (words[SPANS[2].0..SPANS[2].1].to_vec(), rng.random_range(3..48) * HOUR, false),
            ];
            for (q, dt, keyword) in others {
                let mut head = filler(&mut rng, 30..50);
                if keyword {
                    head.insert(rng.random_range(0..head.len()), KEYWORD.to_string());
                }
                drafts.push(Draft {
                    outlet: rng.random_range(0..outlets.len()),
                    timestamp: t_time(t) + dt,
                    title: format!("Notes on {}", FILLER.choose(&mut rng).unwrap()),
                    pieces: vec![
                        Piece::Text(head),
                        Piece::Quote(q.join(" ")),
                        Piece::Text(filler(&mut rng, 25..40)),
                    ],
                    style: rng.random(),
                    citations: Vec::new(),
                    role: Role::Other,
                });
            }
            // Articles without quotes, with and without the keyword.
            for k in 0..6 {
                let mut w = filler(&mut rng, 60..90);
                if k % 2 == 0 {
                    w.insert(rng.random_range(0..w.len()), KEYWORD.to_string());
                }
                drafts.push(Draft {
                    outlet: rng.random_range(0..outlets.len()),
                    timestamp: t_time(t) + rng.random_range(1..70) * HOUR,
                    title: format!("Roundup {}", k + 1),
                    pieces: vec![Piece::Text(w)],
                    style: rng.random(),
                    citations: Vec::new(),
                    role: Role::Other,
                });
            }
        }

        // Wire copies: five single copies and two chains of two.
        let mut originals: Vec<usize> = (0..regular).collect();
        originals.shuffle(&mut rng);
        let chains = [1usize, 1, 1, 1, 1, 2, 2];
        for (&orig, &depth) in originals.iter().zip(&chains) {
            let mut src = orig;
            for _ in 0..depth {
                let copy = wire_copy(&drafts, src, orig, outlets.len(), &mut rng);
                drafts.push(copy);
                src = drafts.len() - 1;
            }
        }

        Self::assemble(seed, plan, outlets, drafts, &leans, &mut rng)
    }

    fn assemble(
        seed: u64,
        plan: Plan,
        outlets: Vec<Outlet>,
        drafts: Vec<Draft>,
        leans: &[Vec<i8>],
        rng: &mut ChaCha8Rng,
    ) -> Self {
        // Ids follow publication order.
        let mut order: Vec<usize> = (0..drafts.len()).collect();
        order.sort_by_key(|&i| (drafts[i].timestamp, i));
        let mut id_of = vec![String::new(); drafts.len()];
        for (k, &i) in order.iter().enumerate() {
            id_of[i] = format!("a{:04}", k + 1);
        }
        let articles: Vec<Article> = order
            .iter()
            .map(|&i| {
                let d = &drafts[i];
                Article {
                    id: id_of[i].clone(),
                    outlet_id: outlets[d.outlet].id.clone(),
                    timestamp: d.timestamp,
                    title: d.title.clone(),
                    url: format!("https://{}/{}", outlets[d.outlet].domain, id_of[i]),
                    body: d.body(),
                }
            })
            .collect();

        // Every copy in a chain collapses onto the chain's original.
        let root = |mut i: usize| {
            while let Role::Copy(src) = drafts[i].role {
                i = src;
            }
            i
        };
        let mut dedup: Vec<DroppedArticle> = (0..drafts.len())
            .filter(|&i| matches!(drafts[i].role, Role::Copy(_)))
            .map(|i| DroppedArticle {
                dropped_id: id_of[i].clone(),
                kept_id: id_of[root(i)].clone(),
            })
            .collect();
        dedup.sort_by(|a, b| a.dropped_id.cmp(&b.dropped_id));

        // Realized clusters: spans of cited groups.
        let cited: BTreeSet<(usize, usize)> = drafts
            .iter()
            .filter(|d| d.role == Role::Regular)
            .flat_map(|d| d.citations.iter().map(|c| (c.transcript, c.span)))
            .collect();
        let group_of = |t: usize, s: usize| -> (usize, usize) {
            for &(x, y) in &MERGED {
                if (s == x || s == y) && cited.contains(&(t, x)) && cited.contains(&(t, y)) {
                    return (SPANS[x].0, SPANS[y].1);
                }
            }
            SPANS[s]
        };
        let tid = |t: usize| plan.records[t].id.clone();
        let mut earliest: BTreeMap<(String, String), i64> = BTreeMap::new();
        let mut clusters: BTreeMap<String, ExpectedCluster> = BTreeMap::new();
        let mut occurrences = 0;
        let mut matches = 0;
        for (i, d) in drafts.iter().enumerate() {
            let kept = !matches!(d.role, Role::Copy(_));
            let body_has_kw = d.pieces.iter().any(|p| matches!(p, Piece::Text(w) if w.iter().any(|x| x == KEYWORD)));
            if kept && body_has_kw {
                occurrences += d
                    .pieces
                    .iter()
                    .filter(|p| matches!(p, Piece::Quote(q) if q.split(' ').count() >= 6))
                    .count();
            }
            if d.role != Role::Regular {
                continue;
            }
            for c in &d.citations {
                matches += 1;
                let (a, b) = group_of(c.transcript, c.span);
                let cid = cluster_id(&tid(c.transcript), a, b);
                let e = clusters.entry(cid.clone()).or_insert_with(|| ExpectedCluster {
                    cluster_id: cid.clone(),
                    transcript_id: tid(c.transcript),
                    span_start: a,
                    span_end: b,
                    citing_outlets: Vec::new(),
                });
                let o = outlets[c.outlet].id.clone();
                if !e.citing_outlets.contains(&o) {
                    e.citing_outlets.push(o.clone());
                }
                let ts = drafts[i].timestamp;
                earliest.entry((o, cid)).and_modify(|x| *x = (*x).min(ts)).or_insert(ts);
            }
        }
        for c in clusters.values_mut() {
            c.citing_outlets.sort();
        }
        let edges: Vec<CitationEdge> = earliest
            .into_iter()
            .map(|((outlet_id, cluster_id), timestamp)| CitationEdge {
                outlet_id,
                cluster_id,
                timestamp,
            })
            .collect();

        // Token volume, counted token by token.
        let label_of: BTreeMap<&str, Label> = outlets.iter().map(|o| (o.id.as_str(), o.label)).collect();
        let token_volume = (0..TRANSCRIPTS)
            .map(|t| {
                let len = TURNS * TURN_TOKENS;
                let mut overall = vec![0u32; len];
                let mut by: BTreeMap<Label, Vec<u32>> = Label::LABELED.iter().map(|&l| (l, vec![0; len])).collect();
                for e in &edges {
                    let c = &clusters[&e.cluster_id];
                    if c.transcript_id != tid(t) {
                        continue;
                    }
                    for k in c.span_start..c.span_end {
                        overall[k] += 1;
                        if let Some(v) = by.get_mut(&label_of[e.outlet_id.as_str()]) {
                            v[k] += 1;
                        }
                    }
                }
                ExpectedVolume {
                    transcript_id: tid(t),
                    length: len,
                    overall: runs(&overall),
                    by_category: by.iter().map(|(l, v)| (*l, runs(v))).collect(),
                }
            })
            .collect();

        // Per-cluster features: a sentiment leaning with the cited spans and
        // three topic weights.
        let mut features = Vec::new();
        for c in clusters.values() {
            let t: usize = c.transcript_id[1..].parse::<usize>().unwrap() - 1;
            let s = SPANS.iter().position(|&(a, _)| a == c.span_start).unwrap();
            let noise: f64 = rng.random_range(-0.4..0.4);
            features.push(FeatureRecord {
                cluster_id: c.cluster_id.clone(),
                feature_name: "sentiment".into(),
                value: ((f64::from(leans[t][s]) * 0.5 + noise) * 100.0).round() / 100.0,
            });
            let w: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            let total: f64 = w.iter().sum();
            for (name, x) in ["topic:economy", "topic:health", "topic:security"].iter().zip(w) {
                features.push(FeatureRecord {
                    cluster_id: c.cluster_id.clone(),
                    feature_name: name.to_string(),
                    value: (x / total * 1000.0).round() / 1000.0,
                });
            }
        }

        let with_keyword = articles.iter().filter(|a| a.mentions(KEYWORD)).count();
        let counts = ExpectedCounts {
            transcripts: plan.records.len(),
            outlets: outlets.len(),
            articles: articles.len(),
            with_keyword,
            kept: with_keyword - dedup.len(),
            duplicates: dedup.len(),
            occurrences,
            matches,
            clusters: clusters.len(),
            edges: edges.len(),
        };
        MiniCorpus {
            transcripts: plan.records,
            outlets,
            articles,
            features,
            expected: Expected {
                seed,
                counts,
                dedup,
                clusters: clusters.into_values().collect(),
                edges,
                token_volume,
            },
        }
    }

    /// Pipeline configuration for the files written by [`MiniCorpus::write`].
    pub fn config_toml(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.expected.seed);
        s.push_str(
            "\n[paths]\ntranscripts = \"transcripts.jsonl\"\narticles = \"articles.jsonl\"\noutlets = \"outlets.jsonl\"\nfeatures = [\"features.jsonl\"]\nworkdir = \"work\"\n",
        );
        let _ = writeln!(s, "\n[corpus]\nspeaker = \"{SPEAKER}\"\nkeyword = \"{KEYWORD}\"");
        s.push_str("\n[surprise]\nnum_graphs = 200\n\n[latent]\ndimensions = 3\nword_min_clusters = 2\n");
        s
    }

    /// Writes the corpus, `features.jsonl`, `expected.json` and `config.toml`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_records(&dir.join("transcripts.jsonl"), &self.transcripts)?;
        write_records(&dir.join("outlets.jsonl"), &self.outlets)?;
        write_records(&dir.join("articles.jsonl"), &self.articles)?;
        write_records(&dir.join("features.jsonl"), &self.features)?;
        write_json(&dir.join("expected.json"), &self.expected)?;
        let cfg = dir.join("config.toml");
        std::fs::write(&cfg, self.config_toml()).map_err(|e| Error::io(&cfg, e))
    }
}

/// A copy of draft `src` under another outlet, published shortly after it,
/// with filler words replaced until it sits at normalized distance 0.10 to
/// 0.18 from `src`. Chained copies must also end up more than 0.22 away
/// from `orig`, so only the chain links them.
fn wire_copy(drafts: &[Draft], src: usize, orig: usize, outlets: usize, rng: &mut ChaCha8Rng) -> Draft {
    let s = &drafts[src];
    let src_body = s.body();
    let orig_body = drafts[orig].body();
    let chained = src != orig;
    let mut outlet = rng.random_range(0..outlets);
    while outlet == s.outlet || outlet == drafts[orig].outlet {
        outlet = rng.random_range(0..outlets);
    }
    let mut pieces = s.pieces.clone();
    // Filler positions, shuffled; chained copies edit from the other end.
    let mut slots: Vec<(usize, usize)> = pieces
        .iter()
        .enumerate()
        .flat_map(|(p, piece)| match piece {
            Piece::Text(w) => (0..w.len()).filter(|&k| w[k] != KEYWORD).map(move |k| (p, k)).collect(),
            Piece::Quote(_) => Vec::new(),
        })
        .collect();
    if chained {
        slots.reverse();
    }
    let mut draft = Draft {
        outlet,
        timestamp: s.timestamp + rng.random_range(20..300) * 60,
        title: s.title.clone(),
        pieces: Vec::new(),
        style: s.style,
        citations: Vec::new(),
        role: Role::Copy(src),
    };
    for (p, k) in slots {
        if let Piece::Text(w) = &mut pieces[p] {
            let old = w[k].clone();
            while w[k] == old {
                w[k] = FILLER.choose(rng).unwrap().to_string();
            }
        }
        draft.pieces = pieces.clone();
        let body = draft.body();
        let d = norm_distance(&src_body, &body);
        if d > 0.18 {
            panic!("wire copy overshot the duplicate band");
        }
        if d >= 0.10 && (!chained || norm_distance(&orig_body, &body) > 0.22) {
            return draft;
        }
    }
    panic!("wire copy could not reach the duplicate band");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_encoding() {
        assert_eq!(runs(&[0, 2, 2, 3, 0, 0, 1]), [(1, 3, 2), (3, 4, 3), (6, 7, 1)]);
        assert!(runs(&[0, 0]).is_empty());
    }

    #[test]
    fn edit_distance_examples() {
        assert_eq!(edit_distance("kitten", "sitting"), 3);
        assert_eq!(edit_distance("", "abc"), 3);
        assert_eq!(edit_distance("same", "same"), 0);
    }
}
