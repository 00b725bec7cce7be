//! Per-token citation volume along a transcript.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::cluster::{CitationEdge, QuoteCluster};
use crate::corpus::Label;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenVolumeTrack {
    pub transcript_id: String,
    /// Number of citing (outlet, cluster) edges covering each token.
    pub overall: Vec<u32>,
    /// The same counts restricted to outlets of each labeled category.
    pub by_category: BTreeMap<Label, Vec<u32>>,
}

/// Counts, for every token of a transcript of length `len`, the citation
/// edges whose cluster span covers it. Clusters of other transcripts and
/// edges to unknown clusters are ignored; spans are clipped to `len`.
pub fn token_volume(
    transcript_id: &str,
    len: usize,
    clusters: &[QuoteCluster],
    edges: &[CitationEdge],
    labels: &HashMap<String, Label>,
) -> TokenVolumeTrack {
    let spans: HashMap<&str, (usize, usize)> = clusters
        .iter()
        .filter(|c| c.transcript_id == transcript_id)
        .map(|c| (c.cluster_id.as_str(), (c.span_start.min(len), c.span_end.min(len))))
        .collect();
    let mut diff = vec![0i64; len + 1];
    let mut cat_diff: BTreeMap<Label, Vec<i64>> = Label::LABELED.iter().map(|&l| (l, vec![0; len + 1])).collect();
    for e in edges {
        let Some(&(a, b)) = spans.get(e.cluster_id.as_str()) else {
            continue;
        };
        diff[a] += 1;
        diff[b] -= 1;
        if let Some(d) = labels.get(&e.outlet_id).and_then(|l| cat_diff.get_mut(l)) {
            d[a] += 1;
            d[b] -= 1;
        }
    }
    let integrate = |d: &[i64]| -> Vec<u32> {
        let mut acc = 0i64;
        d[..len]
            .iter()
            .map(|x| {
                acc += x;
                acc as u32
            })
            .collect()
    };
    TokenVolumeTrack {
        transcript_id: transcript_id.to_string(),
        overall: integrate(&diff),
        by_category: cat_diff.iter().map(|(l, d)| (*l, integrate(d))).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cluster(id: &str, a: usize, b: usize) -> QuoteCluster {
        QuoteCluster {
            cluster_id: id.into(),
            transcript_id: "t".into(),
            span_start: a,
            span_end: b,
            member_occurrence_ids: vec![],
        }
    }

    fn edge(o: &str, c: &str) -> CitationEdge {
        CitationEdge {
            outlet_id: o.into(),
            cluster_id: c.into(),
            timestamp: 0,
        }
    }

    /// Direct per-token count.
    fn oracle(len: usize, spans: &[(usize, usize)], citers: &[usize]) -> Vec<u32> {
        (0..len)
            .map(|t| {
                spans
                    .iter()
                    .zip(citers)
                    .filter(|((a, b), _)| (*a..*b).contains(&t))
                    .map(|(_, &n)| n as u32)
                    .sum()
            })
            .collect()
    }

    #[test]
    fn single_cluster() {
        let labels = HashMap::new();
        let edges = ["p", "q", "r"].map(|o| edge(o, "c"));
        let tr = token_volume("t", 30, &[cluster("c", 10, 20)], &edges, &labels);
        for (i, &v) in tr.overall.iter().enumerate() {
            assert_eq!(v, if (10..20).contains(&i) { 3 } else { 0 });
        }
        assert!(tr.by_category.values().all(|v| v.iter().all(|&x| x == 0)));
    }

    #[test]
    fn overlapping_clusters() {
        let labels: HashMap<String, Label> = [("p".to_string(), Label::DeclaredLiberal)].into();
        let cs = [cluster("a", 10, 20), cluster("b", 15, 25)];
        let edges = [edge("p", "a"), edge("q", "a"), edge("p", "b")];
        let tr = token_volume("t", 30, &cs, &edges, &labels);
        assert_eq!(&tr.overall[10..15], &[2; 5]);
        assert_eq!(&tr.overall[15..20], &[3; 5]);
        assert_eq!(&tr.overall[20..25], &[1; 5]);
        assert_eq!(tr.overall[9] + tr.overall[25], 0);
        assert_eq!(tr.by_category[&Label::DeclaredLiberal], oracle(30, &[(10, 20), (15, 25)], &[1, 1]));
    }

    #[test]
    fn no_matches() {
        let tr = token_volume("t", 5, &[], &[], &HashMap::new());
        assert_eq!(tr.overall, [0; 5]);
        assert_eq!(tr.by_category.len(), 4);
    }

    proptest! {
        #[test]
        fn matches_oracle_and_conserves_mass(
            raw in proptest::collection::vec((0usize..40, 1usize..12, 0usize..4, 0usize..4), 0..12),
        ) {
            let len = 60;
            let cs: Vec<QuoteCluster> = raw.iter().enumerate()
                .map(|(k, &(a, l, _, _))| cluster(&format!("c{k}"), a, a + l))
                .collect();
            let labels: HashMap<String, Label> = (0..3).map(|i| (format!("o{i}"), Label::LABELED[i])).collect();
            let mut edges = Vec::new();
            for (k, &(_, _, n, _)) in raw.iter().enumerate() {
                for o in 0..n {
                    edges.push(edge(&format!("o{o}"), &format!("c{k}")));
                }
            }
            let tr = token_volume("t", len, &cs, &edges, &labels);
            let spans: Vec<(usize, usize)> = cs.iter().map(|c| (c.span_start, c.span_end)).collect();
            let citers: Vec<usize> = raw.iter().map(|r| r.2).collect();
            prop_assert_eq!(&tr.overall, &oracle(len, &spans, &citers));
            let mass: u32 = tr.overall.iter().sum();
            let expected: usize = spans.iter().zip(&citers).map(|((a, b), n)| (b - a) * n).sum();
            prop_assert_eq!(mass as usize, expected);
            for t in 0..len {
                let s: u32 = tr.by_category.values().map(|v| v[t]).sum();
                prop_assert!(s <= tr.overall[t]);
            }
        }
    }
}
