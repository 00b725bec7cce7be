//! Near-duplicate (republished) article removal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Article;
use crate::error::{Error, Result};
use crate::timestamp::DAY;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupParams {
    /// Two bodies are duplicates when `lev(a, b) / max(|a|, |b|)` is at most this.
    pub max_norm_distance: f64,
    /// Only articles published within this many seconds of each other are compared.
    pub window_secs: i64,
    /// Pairs whose shorter/longer body length ratio is below this are skipped.
    /// The effective ratio never exceeds `1 - max_norm_distance`, below which a
    /// match is impossible anyway.
    pub min_length_ratio: f64,
}

impl Default for DedupParams {
    fn default() -> Self {
        DedupParams {
            max_norm_distance: 0.2,
            window_secs: 14 * DAY,
            min_length_ratio: 0.7,
        }
    }
}

impl DedupParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.max_norm_distance) {
            return Err(Error::InvalidParameter(
                "max_norm_distance must lie in [0, 1]".into(),
            ));
        }
        if self.window_secs < 0 {
            return Err(Error::InvalidParameter("dedup window must be >= 0".into()));
        }
        Ok(())
    }

    fn effective_ratio(&self) -> f64 {
        self.min_length_ratio.min(1.0 - self.max_norm_distance)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedArticle {
    pub dropped_id: String,
    pub kept_id: String,
}

#[derive(Debug, Clone, Default)]
pub struct DedupOutcome {
    pub kept: Vec<Article>,
    pub dropped: Vec<DroppedArticle>,
}

/// Character-level Levenshtein distance, or `None` once it must exceed `bound`.
///
/// Only the diagonal band of width `2 * bound + 1` is evaluated and the scan
/// stops as soon as a whole row exceeds the bound.
pub fn levenshtein_bounded(a: &[char], b: &[char], bound: usize) -> Option<usize> {
    let (a, b) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let (n, m) = (a.len(), b.len());
    if m - n > bound {
        return None;
    }
    const INF: usize = usize::MAX / 2;
    let mut prev = vec![INF; m + 1];
    let mut cur = vec![INF; m + 1];
    for (j, p) in prev.iter_mut().enumerate().take(bound.min(m) + 1) {
        *p = j;
    }
    for i in 1..=n {
        let lo = i.saturating_sub(bound).max(1);
        let hi = (i + bound).min(m);
        cur[lo - 1] = if lo == 1 && i <= bound { i } else { INF };
        let mut row_min = cur[lo - 1];
        for j in lo..=hi {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let v = (prev[j - 1] + cost).min(prev[j] + 1).min(cur[j - 1] + 1);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < m {
            cur[hi + 1] = INF;
        }
        if row_min > bound {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Some(prev[m]).filter(|&d| d <= bound)
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_bounded(&a, &b, a.len().max(b.len())).unwrap_or(usize::MAX)
}

/// Groups near-duplicate articles (transitively) and keeps the earliest of
/// each group; ties go to the smallest id. `kept` preserves input order.
pub fn dedup_articles(articles: &[Article], p: &DedupParams) -> Result<DedupOutcome> {
    p.validate()?;
    let bodies: Vec<Vec<char>> = articles.iter().map(|a| a.body.chars().collect()).collect();
    let mut order: Vec<usize> = (0..articles.len()).collect();
    order.sort_by_key(|&i| articles[i].timestamp);

    let ratio = p.effective_ratio();
    let mut candidates = Vec::new();
    for (x, &i) in order.iter().enumerate() {
        for &j in &order[x + 1..] {
            if articles[j].timestamp - articles[i].timestamp > p.window_secs {
                break;
            }
            let (li, lj) = (bodies[i].len(), bodies[j].len());
            let (short, long) = (li.min(lj), li.max(lj));
            if long == 0 || (short as f64) >= ratio * long as f64 {
                candidates.push((i.min(j), i.max(j)));
            }
        }
    }

    let dup_pairs: Vec<(usize, usize)> = candidates
        .par_iter()
        .filter(|&&(i, j)| {
            let long = bodies[i].len().max(bodies[j].len());
            let bound = (p.max_norm_distance * long as f64 + 1e-9).floor() as usize;
            levenshtein_bounded(&bodies[i], &bodies[j], bound).is_some()
        })
        .copied()
        .collect();

    let mut uf = UnionFind::new(articles.len());
    for &(i, j) in &dup_pairs {
        uf.union(i, j);
    }

    // Representative of each group: earliest timestamp, then smallest id.
    let mut winner: Vec<Option<usize>> = vec![None; articles.len()];
    for i in 0..articles.len() {
        let root = uf.find(i);
        let better = match winner[root] {
            None => true,
            Some(w) => {
                (articles[i].timestamp, &articles[i].id) < (articles[w].timestamp, &articles[w].id)
            }
        };
        if better {
            winner[root] = Some(i);
        }
    }

    let mut out = DedupOutcome::default();
    for (i, a) in articles.iter().enumerate() {
        let w = winner[uf.find(i)].expect("every group has a winner");
        if w == i {
            out.kept.push(a.clone());
        } else {
            out.dropped.push(DroppedArticle {
                dropped_id: a.id.clone(),
                kept_id: articles[w].id.clone(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            d[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let c = usize::from(a[i - 1] != b[j - 1]);
                d[i][j] = (d[i - 1][j - 1] + c).min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
            }
        }
        d[a.len()][b.len()]
    }

    fn art(id: &str, ts: i64, body: &str) -> Article {
        Article {
            id: id.into(),
            outlet_id: "o".into(),
            timestamp: ts,
            title: String::new(),
            url: String::new(),
            body: body.into(),
        }
    }

    #[test]
    fn known_distances() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("same", "same"), 0);
    }

    #[test]
    fn ten_edits_in_hundred_chars_is_duplicate() {
        let base: String = (0..100).map(|i| char::from(b'a' + (i % 26) as u8)).collect();
        let mut edited: Vec<char> = base.chars().collect();
        for k in 0..10 {
            edited[k * 10] = 'Z';
        }
        let edited: String = edited.into_iter().collect();
        assert_eq!(naive(&base, &edited), 10);
        let out = dedup_articles(&[art("b", 5, &edited), art("a", 1, &base)], &DedupParams::default())
            .unwrap();
        assert_eq!(out.kept.len(), 1);
        assert_eq!(out.kept[0].id, "a");
        assert_eq!(
            out.dropped,
            [DroppedArticle {
                dropped_id: "b".into(),
                kept_id: "a".into()
            }]
        );
    }

    #[test]
    fn identical_bodies_keep_first() {
        let out = dedup_articles(
            &[art("late", 20, "same words here"), art("early", 10, "same words here")],
            &DedupParams::default(),
        )
        .unwrap();
        assert_eq!(out.kept[0].id, "early");
        // Same instant: smallest id survives.
        let out = dedup_articles(
            &[art("z", 10, "same words here"), art("y", 10, "same words here")],
            &DedupParams::default(),
        )
        .unwrap();
        assert_eq!(out.kept[0].id, "y");
    }

    #[test]
    fn disjoint_bodies_and_window() {
        let p = DedupParams::default();
        let out = dedup_articles(&[art("a", 0, "alpha beta gamma"), art("b", 1, "zzzz yyyy xxxx q")], &p)
            .unwrap();
        assert_eq!(out.kept.len(), 2);
        let out = dedup_articles(&[art("a", 0, "identical"), art("b", 15 * DAY, "identical")], &p).unwrap();
        assert_eq!(out.kept.len(), 2);
    }

    #[test]
    fn transitive_groups() {
        // a~b and b~c but a and c differ by more than the threshold.
        let a = "aaaaaaaaaa";
        let b = "aaaaaaaabb";
        let c = "aaaaaabbbb";
        assert!(naive(a, c) > 2);
        let out = dedup_articles(&[art("a", 0, a), art("b", 1, b), art("c", 2, c)], &DedupParams::default())
            .unwrap();
        assert_eq!(out.kept.len(), 1);
        assert!(out.dropped.iter().all(|d| d.kept_id == "a"));
    }

    proptest! {
        #[test]
        fn bounded_agrees_with_naive(a in "[ab ]{0,30}", b in "[ab ]{0,30}", bound in 0usize..35) {
            let ac: Vec<char> = a.chars().collect();
            let bc: Vec<char> = b.chars().collect();
            let d = naive(&a, &b);
            let got = levenshtein_bounded(&ac, &bc, bound);
            prop_assert_eq!(got, if d <= bound { Some(d) } else { None });
        }

        #[test]
        fn partition_sizes(bodies in proptest::collection::vec("[ab]{3,8}", 0..12)) {
            let arts: Vec<Article> = bodies.iter().enumerate()
                .map(|(i, b)| art(&format!("x{i:02}"), i as i64, b)).collect();
            let out = dedup_articles(&arts, &DedupParams::default()).unwrap();
            prop_assert_eq!(out.kept.len() + out.dropped.len(), arts.len());
        }
    }
}
