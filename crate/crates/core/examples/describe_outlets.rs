//! Per-outlet descriptive statistics and their category aggregates.
//!
//! Four outlets, a handful of quote clusters and articles, small enough to
//! check every number by hand.
//!
//! ```text
//! cargo run --example describe_outlets
//! ```

use std::collections::HashMap;

use quotus::cluster::CitationEdge;
use quotus::corpus::{Label, Outlet};
use quotus::describe::{
    category_aggregates, cluster_reaction_ranks, outlet_stats, quoted_fraction, reaction_ranks, ArticleFacts,
    MentionCount,
};

fn main() -> quotus::Result<()> {
    let outlet = |id: &str, label| Outlet {
        id: id.into(),
        domain: format!("{id}.example"),
        label,
    };
    let outlets = [
        outlet("fast", Label::DeclaredLiberal),
        outlet("steady", Label::DeclaredLiberal),
        outlet("slow", Label::DeclaredConservative),
        outlet("other", Label::DeclaredConservative),
    ];

    // Minutes after the event at which each outlet first cites each cluster.
    let edge = |o: &str, c: &str, minutes: i64| CitationEdge {
        outlet_id: o.into(),
        cluster_id: c.into(),
        timestamp: minutes * 60,
    };
    let edges = [
        edge("fast", "t1:0-12", 10),
        edge("steady", "t1:0-12", 45),
        edge("slow", "t1:0-12", 300),
        edge("fast", "t1:30-41", 20),
        edge("slow", "t1:30-41", 20),
        edge("other", "t1:30-41", 90),
        edge("steady", "t1:60-70", 5),
    ];
    println!("reaction ranks in t1:0-12: {:?}", cluster_reaction_ranks(&[600, 2700, 18000]));
    println!("reaction ranks in t1:30-41 (tie first): {:?}", cluster_reaction_ranks(&[1200, 1200, 5400]));
    // t1:60-70 has a single citer and does not count.
    let reaction = reaction_ranks(&edges, 2, None)?;

    let facts = |o: &str, tokens, spans: &[(usize, usize)]| ArticleFacts {
        outlet_id: o.into(),
        tokens,
        matched_spans: spans.to_vec(),
    };
    let articles = [
        facts("fast", 200, &[(10, 22)]),
        facts("fast", 400, &[(50, 62), (55, 70)]),
        facts("steady", 800, &[(100, 112), (300, 310)]),
        facts("slow", 1000, &[(5, 17)]),
        facts("other", 600, &[(0, 11)]),
        facts("other", 300, &[]),
    ];
    println!("overlapping spans count once: {:.4}", quoted_fraction(400, &[(50, 62), (55, 70)]));

    let mentions: HashMap<String, MentionCount> = [("fast", 10, 4), ("steady", 20, 5), ("slow", 8, 6), ("other", 0, 0)]
        .into_iter()
        .map(|(o, total, mentioning)| (o.to_string(), MentionCount { total, mentioning }))
        .collect();

    let stats = outlet_stats(&outlets, &mentions, &articles, &reaction);
    println!("\n  outlet  label  mention  citing     words  quoted  reaction (clusters)");
    for s in &stats {
        let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!(
            "  {:<7} {:<5}  {:>7}  {:>6}  {:>8}  {:>6}  {:>8} ({})",
            s.outlet_id,
            s.label.as_str(),
            f(s.mention_fraction),
            s.citing_articles,
            f(s.mean_article_words),
            f(s.mean_quoted_fraction),
            f(s.reaction_rank_mean),
            s.reaction_clusters
        );
    }

    println!("\n  category  statistic              mean    stderr  n");
    for a in category_aggregates(&stats) {
        let se = a.stderr.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!("  {:<8}  {:<20} {:>7.3}  {:>7}  {}", a.category.as_str(), a.statistic, a.mean, se, a.n);
    }
    Ok(())
}
