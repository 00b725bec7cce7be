//! Transcript-anchored quote clusters and outlet-to-cluster citation edges.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::align::QuoteMatch;
use crate::corpus::Article;
use crate::error::{Error, Result};
use crate::unionfind::UnionFind;

pub const DEFAULT_MIN_OVERLAP: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuoteCluster {
    pub cluster_id: String,
    pub transcript_id: String,
    pub span_start: usize,
    pub span_end: usize,
    /// Occurrence ids of member matches, sorted.
    pub member_occurrence_ids: Vec<String>,
}

/// Earliest citation of a cluster by an outlet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationEdge {
    pub outlet_id: String,
    pub cluster_id: String,
    #[serde(with = "crate::timestamp::iso")]
    pub timestamp: i64,
}

pub fn cluster_id(transcript_id: &str, start: usize, end: usize) -> String {
    format!("{transcript_id}:{start}-{end}")
}

fn overlap(a: (usize, usize), b: (usize, usize)) -> usize {
    a.1.min(b.1).saturating_sub(a.0.max(b.0))
}

/// Connected components of matches whose spans in the same transcript share
/// at least `min_overlap` token positions. Output is sorted by
/// (transcript, span) and does not depend on input order.
pub fn cluster_matches(matches: &[QuoteMatch], min_overlap: usize) -> Result<Vec<QuoteCluster>> {
    if min_overlap == 0 {
        return Err(Error::InvalidParameter("min_overlap must be at least 1".into()));
    }
    let mut by_transcript: BTreeMap<&str, Vec<&QuoteMatch>> = BTreeMap::new();
    for m in matches {
        by_transcript.entry(&m.transcript_id).or_default().push(m);
    }

    let mut clusters = Vec::new();
    let mut used_ids = HashSet::new();
    for (tid, mut ms) in by_transcript {
        ms.sort_by(|a, b| {
            (a.span_start, a.span_end, &a.occurrence_id).cmp(&(b.span_start, b.span_end, &b.occurrence_id))
        });
        let mut uf = UnionFind::new(ms.len());
        for i in 0..ms.len() {
            let si = (ms[i].span_start, ms[i].span_end);
            for (j, mj) in ms.iter().enumerate().skip(i + 1) {
                // Later spans start no earlier, so once the remaining room in
                // span i is too small no further j can reach the threshold.
                if si.1.saturating_sub(mj.span_start) < min_overlap {
                    break;
                }
                if overlap(si, (mj.span_start, mj.span_end)) >= min_overlap {
                    uf.union(i, j);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..ms.len() {
            groups.entry(uf.find(i)).or_default().push(i);
        }
        let mut local: Vec<QuoteCluster> = groups
            .into_values()
            .map(|members| {
                let start = members.iter().map(|&i| ms[i].span_start).min().unwrap();
                let end = members.iter().map(|&i| ms[i].span_end).max().unwrap();
                let mut ids: Vec<String> = members.iter().map(|&i| ms[i].occurrence_id.clone()).collect();
                ids.sort();
                QuoteCluster {
                    cluster_id: String::new(),
                    transcript_id: tid.to_string(),
                    span_start: start,
                    span_end: end,
                    member_occurrence_ids: ids,
                }
            })
            .collect();
        local.sort_by(|a, b| {
            (a.span_start, a.span_end, &a.member_occurrence_ids)
                .cmp(&(b.span_start, b.span_end, &b.member_occurrence_ids))
        });
        for mut c in local {
            let base = cluster_id(tid, c.span_start, c.span_end);
            let mut id = base.clone();
            let mut k = 2;
            while !used_ids.insert(id.clone()) {
                id = format!("{base}~{k}");
                k += 1;
            }
            c.cluster_id = id;
            clusters.push(c);
        }
    }
    Ok(clusters)
}

/// One edge per (outlet, cluster) carrying the earliest citing article's
/// timestamp, sorted by (outlet, cluster). Matches from articles missing in
/// `articles` (for example dropped duplicates) are ignored.
pub fn earliest_edges(
    clusters: &[QuoteCluster],
    matches: &[QuoteMatch],
    articles: &[Article],
) -> Vec<CitationEdge> {
    let cluster_of: HashMap<&str, &str> = clusters
        .iter()
        .flat_map(|c| {
            c.member_occurrence_ids
                .iter()
                .map(move |o| (o.as_str(), c.cluster_id.as_str()))
        })
        .collect();
    let time_of: HashMap<&str, i64> = articles.iter().map(|a| (a.id.as_str(), a.timestamp)).collect();

    let mut earliest: BTreeMap<(&str, &str), i64> = BTreeMap::new();
    for m in matches {
        let (Some(&cid), Some(&ts)) = (
            cluster_of.get(m.occurrence_id.as_str()),
            time_of.get(m.article_id.as_str()),
        ) else {
            continue;
        };
        earliest
            .entry((m.outlet_id.as_str(), cid))
            .and_modify(|t| *t = (*t).min(ts))
            .or_insert(ts);
    }
    earliest
        .into_iter()
        .map(|((o, c), ts)| CitationEdge {
            outlet_id: o.to_string(),
            cluster_id: c.to_string(),
            timestamp: ts,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn m(id: &str, tr: &str, start: usize, end: usize) -> QuoteMatch {
        QuoteMatch {
            occurrence_id: id.into(),
            article_id: id.split('#').next().unwrap().into(),
            outlet_id: "o".into(),
            transcript_id: tr.into(),
            span_start: start,
            span_end: end,
            score: 0.0,
            quote_text: String::new(),
        }
    }

    fn spans(cs: &[QuoteCluster]) -> Vec<(usize, usize)> {
        cs.iter().map(|c| (c.span_start, c.span_end)).collect()
    }

    #[test]
    fn five_token_overlap_joins() {
        let cs = cluster_matches(&[m("a", "t", 10, 20), m("b", "t", 15, 25)], 5).unwrap();
        assert_eq!(spans(&cs), [(10, 25)]);
        assert_eq!(cs[0].cluster_id, "t:10-25");
        assert_eq!(cs[0].member_occurrence_ids, ["a", "b"]);
    }

    #[test]
    fn four_token_overlap_splits() {
        let cs = cluster_matches(&[m("a", "t", 10, 20), m("b", "t", 16, 25)], 5).unwrap();
        assert_eq!(spans(&cs), [(10, 20), (16, 25)]);
    }

    #[test]
    fn chaining() {
        let cs = cluster_matches(&[m("a", "t", 0, 10), m("b", "t", 8, 18), m("c", "t", 16, 26)], 2)
            .unwrap();
        assert_eq!(spans(&cs), [(0, 26)]);
        let cs = cluster_matches(&[m("a", "t", 0, 10), m("b", "t", 5, 15), m("c", "t", 10, 20)], 5)
            .unwrap();
        assert_eq!(spans(&cs), [(0, 20)]);
    }

    #[test]
    fn transcripts_never_merge() {
        let cs = cluster_matches(&[m("a", "t1", 0, 10), m("b", "t2", 0, 10)], 5).unwrap();
        assert_eq!(cs.len(), 2);
        assert!(cluster_matches(&[], 0).is_err());
    }

    fn art(id: &str, outlet: &str, ts: i64) -> Article {
        Article {
            id: id.into(),
            outlet_id: outlet.into(),
            timestamp: ts,
            title: String::new(),
            url: String::new(),
            body: "x".into(),
        }
    }

    #[test]
    fn earliest_edge_per_outlet() {
        let mut ms = vec![m("a1#0", "t", 0, 10), m("a2#0", "t", 0, 10), m("a3#0", "t", 2, 9)];
        let arts = vec![art("a1", "o", 30), art("a2", "o", 10), art("a3", "o", 20)];
        let cs = cluster_matches(&ms, 5).unwrap();
        let es = earliest_edges(&cs, &ms, &arts);
        assert_eq!(es.len(), 1);
        assert_eq!(es[0].timestamp, 10);

        ms[2].outlet_id = "p".into();
        let es = earliest_edges(&cs, &ms, &arts);
        assert_eq!(es.len(), 2);
        assert!(earliest_edges(&cs, &[], &arts).is_empty());
    }

    proptest! {
        #[test]
        fn order_invariant_partition(
            raw in proptest::collection::vec((0usize..3, 0usize..60, 1usize..15), 0..30),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let ms: Vec<QuoteMatch> = raw.iter().enumerate()
                .map(|(i, &(t, s, len))| m(&format!("q{i}"), &format!("t{t}"), s, s + len))
                .collect();
            let base = cluster_matches(&ms, 5).unwrap();
            let total: usize = base.iter().map(|c| c.member_occurrence_ids.len()).sum();
            prop_assert_eq!(total, ms.len());
            let mut shuffled = ms.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(cluster_matches(&shuffled, 5).unwrap(), base);
        }
    }
}
