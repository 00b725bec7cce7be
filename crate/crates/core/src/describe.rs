//! Per-outlet descriptive statistics and their category aggregates.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::cluster::CitationEdge;
use crate::corpus::{Article, Label, Outlet};
use crate::error::{Error, Result};
use crate::stats::{mean_ranks, mean_stderr};

pub const DEFAULT_MIN_CITERS: usize = 5;

/// Share of `articles` whose title or body contains `keyword`.
pub fn mention_fraction<'a, I>(articles: I, keyword: &str) -> Result<f64>
where
    I: IntoIterator<Item = &'a Article>,
{
    let (mut hit, mut total) = (0usize, 0usize);
    for a in articles {
        total += 1;
        hit += usize::from(a.mentions(keyword));
    }
    if total == 0 {
        return Err(Error::InvalidParameter("mention fraction of an outlet without articles".into()));
    }
    Ok(hit as f64 / total as f64)
}

/// Relative citation order within one cluster: the citer at sorted position
/// `k` of `n` gets `k / (n - 1)`, ties share the mean. Needs `n >= 2`.
pub fn cluster_reaction_ranks(times: &[i64]) -> Vec<f64> {
    let n = times.len();
    assert!(n >= 2, "reaction ranks need at least two citers");
    let t: Vec<f64> = times.iter().map(|&t| t as f64).collect();
    mean_ranks(&t).into_iter().map(|r| r / (n - 1) as f64).collect()
}

/// Mean reaction rank per outlet over clusters cited by at least
/// `min_citers` outlets of `subset` (all outlets when `None`). Outlets
/// without a qualifying cluster are absent from the result.
pub fn reaction_ranks(
    edges: &[CitationEdge],
    min_citers: usize,
    subset: Option<&HashSet<String>>,
) -> Result<BTreeMap<String, (f64, usize)>> {
    if min_citers < 2 {
        return Err(Error::InvalidParameter("min_citers must be at least 2".into()));
    }
    let mut by_cluster: BTreeMap<&str, Vec<&CitationEdge>> = BTreeMap::new();
    for e in edges {
        if subset.is_none_or(|s| s.contains(&e.outlet_id)) {
            by_cluster.entry(&e.cluster_id).or_default().push(e);
        }
    }
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for citers in by_cluster.values().filter(|c| c.len() >= min_citers) {
        let times: Vec<i64> = citers.iter().map(|e| e.timestamp).collect();
        for (e, r) in citers.iter().zip(cluster_reaction_ranks(&times)) {
            let slot = acc.entry(e.outlet_id.clone()).or_default();
            slot.0 += r;
            slot.1 += 1;
        }
    }
    Ok(acc.into_iter().map(|(o, (sum, n))| (o, (sum / n as f64, n))).collect())
}

/// Length of the union of half-open intervals.
pub fn covered_length(spans: &[(usize, usize)]) -> usize {
    let mut s: Vec<(usize, usize)> = spans.iter().copied().filter(|(a, b)| b > a).collect();
    s.sort_unstable();
    let mut total = 0;
    let mut cur: Option<(usize, usize)> = None;
    for (a, b) in s {
        match cur {
            Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
            _ => {
                if let Some((ca, cb)) = cur {
                    total += cb - ca;
                }
                cur = Some((a, b));
            }
        }
    }
    total + cur.map_or(0, |(a, b)| b - a)
}

/// Fraction of an article's tokens covered by matched quotes (overlapping
/// article-side spans counted once).
pub fn quoted_fraction(article_tokens: usize, quote_spans: &[(usize, usize)]) -> f64 {
    if article_tokens == 0 {
        return 0.0;
    }
    (covered_length(quote_spans) as f64 / article_tokens as f64).min(1.0)
}

/// Per-article inputs to the statistics, precomputed by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct ArticleFacts {
    pub outlet_id: String,
    pub tokens: usize,
    /// Article-side token spans of quotes that matched a transcript.
    pub matched_spans: Vec<(usize, usize)>,
}

/// Article counts of one outlet in the unfiltered corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MentionCount {
    pub total: usize,
    pub mentioning: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutletStats {
    pub outlet_id: String,
    pub label: Label,
    /// Over every article of the outlet before keyword filtering.
    pub mention_fraction: Option<f64>,
    /// Over the outlet's articles with at least one matched quote.
    pub citing_articles: usize,
    pub mean_article_words: Option<f64>,
    pub mean_quoted_fraction: Option<f64>,
    pub reaction_rank_mean: Option<f64>,
    pub reaction_clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAggregate {
    pub category: Label,
    pub statistic: String,
    pub mean: f64,
    pub stderr: Option<f64>,
    /// Number of outlets contributing a value.
    pub n: usize,
}

pub fn outlet_stats(
    outlets: &[Outlet],
    mentions: &HashMap<String, MentionCount>,
    articles: &[ArticleFacts],
    reaction: &BTreeMap<String, (f64, usize)>,
) -> Vec<OutletStats> {
    let mut per: HashMap<&str, Vec<&ArticleFacts>> = HashMap::new();
    for a in articles.iter().filter(|a| !a.matched_spans.is_empty()) {
        per.entry(&a.outlet_id).or_default().push(a);
    }
    outlets
        .iter()
        .map(|o| {
            let arts = per.get(o.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            let n = arts.len();
            let mean = |f: &dyn Fn(&ArticleFacts) -> f64| {
                (n > 0).then(|| arts.iter().map(|a| f(a)).sum::<f64>() / n as f64)
            };
            let mc = mentions.get(&o.id).copied().unwrap_or_default();
            let (rr, rc) = reaction.get(&o.id).map_or((None, 0), |&(m, c)| (Some(m), c));
            OutletStats {
                outlet_id: o.id.clone(),
                label: o.label,
                mention_fraction: (mc.total > 0).then(|| mc.mentioning as f64 / mc.total as f64),
                citing_articles: n,
                mean_article_words: mean(&|a| a.tokens as f64),
                mean_quoted_fraction: mean(&|a| quoted_fraction(a.tokens, &a.matched_spans)),
                reaction_rank_mean: rr,
                reaction_clusters: rc,
            }
        })
        .collect()
}

pub const STATISTICS: [&str; 4] = [
    "mention_fraction",
    "reaction_rank_mean",
    "mean_article_words",
    "mean_quoted_fraction",
];

fn statistic(s: &OutletStats, name: &str) -> Option<f64> {
    match name {
        "mention_fraction" => s.mention_fraction,
        "reaction_rank_mean" => s.reaction_rank_mean,
        "mean_article_words" => s.mean_article_words,
        "mean_quoted_fraction" => s.mean_quoted_fraction,
        _ => None,
    }
}

/// Mean and standard error over the outlets of each labeled category.
pub fn category_aggregates(stats: &[OutletStats]) -> Vec<CategoryAggregate> {
    let mut out = Vec::new();
    for label in Label::LABELED {
        for name in STATISTICS {
            let vals: Vec<f64> = stats
                .iter()
                .filter(|s| s.label == label)
                .filter_map(|s| statistic(s, name))
                .collect();
            if let Some((mean, stderr)) = mean_stderr(&vals) {
                out.push(CategoryAggregate {
                    category: label,
                    statistic: name.to_string(),
                    mean,
                    stderr,
                    n: vals.len(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn art(title: &str, body: &str) -> Article {
        Article {
            id: "a".into(),
            outlet_id: "o".into(),
            timestamp: 0,
            title: title.into(),
            url: String::new(),
            body: body.into(),
        }
    }

    fn edge(o: &str, c: &str, t: i64) -> CitationEdge {
        CitationEdge {
            outlet_id: o.into(),
            cluster_id: c.into(),
            timestamp: t,
        }
    }

    #[test]
    fn mention_fraction_examples() {
        let arts = [art("Obama", "x"), art("", "Obama says"), art("", "Obama"), art("", "none")];
        assert_eq!(mention_fraction(&arts, "Obama").unwrap(), 0.75);
        assert_eq!(mention_fraction(&arts[3..], "Obama").unwrap(), 0.0);
        assert_eq!(mention_fraction(&arts, "").unwrap(), 1.0);
        assert!(mention_fraction(&[], "Obama").is_err());
    }

    #[test]
    fn reaction_rank_examples() {
        assert_eq!(cluster_reaction_ranks(&[1, 2, 3, 4, 5]), [0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(cluster_reaction_ranks(&[1, 1, 3, 4, 5]), [0.125, 0.125, 0.5, 0.75, 1.0]);

        let mut edges: Vec<CitationEdge> = ["p", "q", "r", "s", "t"]
            .iter()
            .enumerate()
            .map(|(i, o)| edge(o, "c1", i as i64))
            .collect();
        // Four citers only: excluded.
        edges.extend(["p", "q", "r", "s"].iter().map(|o| edge(o, "c2", 0)));
        let r = reaction_ranks(&edges, 5, None).unwrap();
        assert_eq!(r["p"], (0.0, 1));
        assert_eq!(r["t"], (1.0, 1));
        let subset: HashSet<String> = ["p", "q", "r", "s"].iter().map(|s| s.to_string()).collect();
        assert!(reaction_ranks(&edges, 5, Some(&subset)).unwrap().is_empty());
    }

    #[test]
    fn quoted_fraction_examples() {
        assert_eq!(quoted_fraction(100, &[(0, 25)]), 0.25);
        assert_eq!(quoted_fraction(100, &[]), 0.0);
        assert_eq!(quoted_fraction(100, &[(10, 20), (15, 25)]), 0.15);
        assert_eq!(covered_length(&[(0, 2), (5, 9), (1, 3), (9, 10)]), 8);
    }

    #[test]
    fn aggregates_match_direct_computation() {
        let mk = |id: &str, label, m: f64| OutletStats {
            outlet_id: id.into(),
            label,
            mention_fraction: Some(m),
            citing_articles: 0,
            mean_article_words: None,
            mean_quoted_fraction: None,
            reaction_rank_mean: None,
            reaction_clusters: 0,
        };
        let stats = [mk("a", Label::DeclaredConservative, 0.2), mk("b", Label::DeclaredConservative, 0.4), mk("c", Label::SuspectedLiberal, 0.9), mk("d", Label::Unlabeled, 1.0)];
        let agg = category_aggregates(&stats);
        assert_eq!(agg.len(), 2);
        let dc = &agg[0];
        assert_eq!((dc.category, dc.n), (Label::DeclaredConservative, 2));
        assert!((dc.mean - 0.3).abs() < 1e-15);
        // sd = sqrt(0.02), stderr = sd / sqrt(2) = 0.1
        assert!((dc.stderr.unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(agg[1].stderr, None);
    }
}
