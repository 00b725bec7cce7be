//! Static report: JSON data files plus one self-contained HTML page.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::stages::{read_clusters, read_edges, read_matches, read_outlets, read_transcripts, Summary};
use super::volume::{token_volume, TokenVolumeTrack};
use super::Workdir;
use crate::bigraph::SurpriseResult;
use crate::corpus::Label;
use crate::describe::{CategoryAggregate, OutletStats};
use crate::error::{Error, Result};
use crate::latent::{EmbeddingRecord, EntityKind, OutletRanking};
use crate::records::{read_json, read_records, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub text: String,
    pub occurrences: usize,
    pub outlets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterVariants {
    pub cluster_id: String,
    pub transcript_id: String,
    pub span_start: usize,
    pub span_end: usize,
    /// The transcript tokens of the cluster span.
    pub transcript_text: String,
    pub citing_outlets: Vec<String>,
    /// Distinct quote texts, most frequent first.
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub entity_id: String,
    pub kind: EntityKind,
    pub label: Option<Label>,
    pub x: f64,
    pub y: f64,
    /// Number of citation edges of the entity.
    pub citations: usize,
}

fn values<T>(recs: Vec<(usize, T)>) -> Vec<T> {
    recs.into_iter().map(|(_, r)| r).collect()
}

pub(super) fn run(cfg: &PipelineConfig, wd: &Workdir) -> Result<Summary> {
    let outlets = read_outlets(wd)?;
    let transcripts = read_transcripts(cfg, wd)?;
    let clusters = read_clusters(wd)?;
    let edges = read_edges(wd)?;
    let matches = read_matches(wd)?;
    let labels: HashMap<String, Label> = outlets.iter().map(|o| (o.id.clone(), o.label)).collect();

    let tracks: Vec<TokenVolumeTrack> = transcripts
        .iter()
        .map(|t| token_volume(&t.id, t.tokens.len(), &clusters, &edges, &labels))
        .collect();

    let mut citers: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for e in &edges {
        citers.entry(e.cluster_id.as_str()).or_default().insert(e.outlet_id.as_str());
    }
    let match_of: HashMap<&str, &crate::align::QuoteMatch> =
        matches.iter().map(|m| (m.occurrence_id.as_str(), m)).collect();
    let tokens_of: HashMap<&str, &[String]> = transcripts.iter().map(|t| (t.id.as_str(), t.tokens.as_slice())).collect();
    let mut variants: Vec<ClusterVariants> = clusters
        .iter()
        .map(|c| {
            let mut by_text: BTreeMap<&str, (usize, BTreeSet<&str>)> = BTreeMap::new();
            for id in &c.member_occurrence_ids {
                if let Some(m) = match_of.get(id.as_str()) {
                    let slot = by_text.entry(m.quote_text.as_str()).or_default();
                    slot.0 += 1;
                    slot.1.insert(m.outlet_id.as_str());
                }
            }
            let mut vs: Vec<Variant> = by_text
                .into_iter()
                .map(|(text, (n, os))| Variant {
                    text: text.to_string(),
                    occurrences: n,
                    outlets: os.into_iter().map(str::to_string).collect(),
                })
                .collect();
            vs.sort_by(|a, b| b.occurrences.cmp(&a.occurrences).then_with(|| a.text.cmp(&b.text)));
            let text = tokens_of
                .get(c.transcript_id.as_str())
                .and_then(|t| t.get(c.span_start..c.span_end))
                .map(|t| t.join(" "))
                .unwrap_or_default();
            ClusterVariants {
                cluster_id: c.cluster_id.clone(),
                transcript_id: c.transcript_id.clone(),
                span_start: c.span_start,
                span_end: c.span_end,
                transcript_text: text,
                citing_outlets: citers
                    .get(c.cluster_id.as_str())
                    .map(|s| s.iter().map(|o| o.to_string()).collect())
                    .unwrap_or_default(),
                variants: vs,
            }
        })
        .collect();
    variants.sort_by(|a, b| {
        b.citing_outlets
            .len()
            .cmp(&a.citing_outlets.len())
            .then_with(|| a.cluster_id.cmp(&b.cluster_id))
    });

    let embeddings: Vec<EmbeddingRecord> = values(read_records(&wd.path("embeddings.jsonl"))?);
    let mut degree: HashMap<&str, usize> = HashMap::new();
    for e in &edges {
        *degree.entry(e.outlet_id.as_str()).or_default() += 1;
        *degree.entry(e.cluster_id.as_str()).or_default() += 1;
    }
    let scatter: Vec<ScatterPoint> = embeddings
        .iter()
        .filter(|e| e.kind != EntityKind::Feature)
        .map(|e| ScatterPoint {
            entity_id: e.entity_id.clone(),
            kind: e.kind,
            label: (e.kind == EntityKind::Outlet).then(|| labels.get(&e.entity_id).copied()).flatten(),
            x: e.coordinates.first().copied().unwrap_or(0.0),
            y: e.coordinates.get(1).copied().unwrap_or(0.0),
            citations: degree.get(e.entity_id.as_str()).copied().unwrap_or(0),
        })
        .collect();

    write_json(&wd.path("token_volume.json"), &tracks)?;
    write_json(&wd.path("cluster_variants.json"), &variants)?;
    write_json(&wd.path("latent_scatter.json"), &scatter)?;

    let page = Page {
        cfg,
        tracks: &tracks,
        variants: &variants,
        scatter: &scatter,
        stats: values(read_records(&wd.path("stats.jsonl"))?),
        aggregates: values(read_records(&wd.path("stats_categories.jsonl"))?),
        surprise: values(read_records(&wd.path("surprise.jsonl"))?),
        eval: read_json(&wd.path("eval.json"))?,
        rankings: read_json(&wd.path("rankings.json"))?,
    };
    let html = page.render();
    std::fs::write(wd.path("report.html"), html).map_err(|e| Error::io(wd.path("report.html"), e))?;
    Ok(vec![
        ("tracks", tracks.len()),
        ("clusters", variants.len()),
        ("scatter_points", scatter.len()),
    ])
}

fn color(l: Label) -> &'static str {
    match l {
        Label::DeclaredConservative => "#b2182b",
        Label::SuspectedConservative => "#ef8a62",
        Label::SuspectedLiberal => "#67a9cf",
        Label::DeclaredLiberal => "#2166ac",
        Label::Unlabeled => "#888888",
    }
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "&ndash;".to_string(), |x| format!("{x:.3}"))
}

struct Page<'a> {
    cfg: &'a PipelineConfig,
    tracks: &'a [TokenVolumeTrack],
    variants: &'a [ClusterVariants],
    scatter: &'a [ScatterPoint],
    stats: Vec<OutletStats>,
    aggregates: Vec<CategoryAggregate>,
    surprise: Vec<SurpriseResult>,
    eval: serde_json::Value,
    rankings: Vec<OutletRanking>,
}

const STYLE: &str = "body{font-family:sans-serif;max-width:1000px;margin:2em auto;color:#222}\
table{border-collapse:collapse;margin:1em 0;font-size:90%}td,th{border:1px solid #ccc;padding:2px 6px;text-align:left}\
th{background:#f3f3f3}svg{border:1px solid #ddd;background:#fff}.legend span{margin-right:1em}\
.muted{color:#777}";

impl Page<'_> {
    fn render(&self) -> String {
        let mut h = String::new();
        let title = esc(&self.cfg.report.title);
        let _ = write!(
            h,
            "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{title}</title><style>{STYLE}</style></head><body>\n<h1>{title}</h1>\n"
        );
        self.legend(&mut h);
        self.volume(&mut h);
        self.variants(&mut h);
        self.scatter(&mut h);
        self.rankings(&mut h);
        self.describe(&mut h);
        self.surprise(&mut h);
        self.completion(&mut h);
        h.push_str("</body></html>\n");
        h
    }

    fn legend(&self, h: &mut String) {
        h.push_str("<p class=\"legend\"><span style=\"color:#444\">&#9632; all outlets</span>");
        for l in Label::LABELED {
            let _ = write!(h, "<span style=\"color:{}\">&#9632; {}</span>", color(l), l.as_str());
        }
        h.push_str("</p>\n");
    }

    fn volume(&self, h: &mut String) {
        h.push_str("<h2>Quotation volume per transcript token</h2>\n");
        let mut order: Vec<&TokenVolumeTrack> = self.tracks.iter().collect();
        order.sort_by_key(|t| std::cmp::Reverse(t.overall.iter().map(|&x| u64::from(x)).sum::<u64>()));
        for t in order.into_iter().take(self.cfg.report.max_tracks) {
            let (w, ht) = (960.0, 140.0);
            let n = t.overall.len().max(1) as f64;
            let top = t.overall.iter().copied().max().unwrap_or(0).max(1) as f64;
            let _ = write!(
                h,
                "<h3>{}</h3>\n<svg width=\"{w}\" height=\"{ht}\" viewBox=\"0 0 {w} {ht}\">",
                esc(&t.transcript_id)
            );
            let line = |vals: &[u32]| -> String {
                let mut pts = String::new();
                for (i, &v) in vals.iter().enumerate() {
                    let x0 = i as f64 / n * w;
                    let x1 = (i + 1) as f64 / n * w;
                    let y = ht - 5.0 - f64::from(v) / top * (ht - 15.0);
                    let _ = write!(pts, "{x0:.1},{y:.1} {x1:.1},{y:.1} ");
                }
                pts
            };
            let _ = write!(
                h,
                "<polyline fill=\"none\" stroke=\"#444\" stroke-width=\"1.5\" points=\"{}\"/>",
                line(&t.overall)
            );
            for (l, vals) in &t.by_category {
                let _ = write!(
                    h,
                    "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"{}\"/>",
                    color(*l),
                    line(vals)
                );
            }
            let _ = writeln!(
                h,
                "<text x=\"4\" y=\"12\" font-size=\"10\">max {top} citing outlets, {} tokens</text></svg>",
                t.overall.len()
            );
        }
    }

    fn variants(&self, h: &mut String) {
        h.push_str("<h2>Most cited quote clusters</h2>\n");
        for c in self.variants.iter().take(self.cfg.report.max_clusters) {
            let _ = write!(
                h,
                "<h3>{} <span class=\"muted\">({} outlets)</span></h3>\n<p><em>{}</em></p>\n<table><tr><th>variant</th><th>occurrences</th><th>outlets</th></tr>",
                esc(&c.cluster_id),
                c.citing_outlets.len(),
                esc(&c.transcript_text)
            );
            for v in &c.variants {
                let _ = write!(
                    h,
                    "<tr><td>{}</td><td>{}</td><td>{}</td></tr>",
                    esc(&v.text),
                    v.occurrences,
                    esc(&v.outlets.join(", "))
                );
            }
            h.push_str("</table>\n");
        }
    }

    fn scatter(&self, h: &mut String) {
        h.push_str("<h2>Latent space (dimensions 1 and 2)</h2>\n");
        let (w, ht, pad) = (640.0, 480.0, 20.0);
        let xs = self.scatter.iter().map(|p| p.x.abs()).fold(1e-12, f64::max);
        let ys = self.scatter.iter().map(|p| p.y.abs()).fold(1e-12, f64::max);
        let _ = write!(h, "<svg width=\"{w}\" height=\"{ht}\" viewBox=\"0 0 {w} {ht}\">");
        let _ = write!(
            h,
            "<line x1=\"{}\" y1=\"0\" x2=\"{}\" y2=\"{ht}\" stroke=\"#eee\"/><line x1=\"0\" y1=\"{}\" x2=\"{w}\" y2=\"{}\" stroke=\"#eee\"/>",
            w / 2.0,
            w / 2.0,
            ht / 2.0,
            ht / 2.0
        );
        let max_c = self.scatter.iter().map(|p| p.citations).max().unwrap_or(1).max(1) as f64;
        // Clusters first so outlets are drawn on top.
        for kind in [EntityKind::Cluster, EntityKind::Outlet] {
            for p in self.scatter.iter().filter(|p| p.kind == kind) {
                let cx = w / 2.0 + p.x / xs * (w / 2.0 - pad);
                let cy = ht / 2.0 - p.y / ys * (ht / 2.0 - pad);
                let r = 2.0 + 6.0 * (p.citations as f64 / max_c).sqrt();
                let fill = match (kind, p.label) {
                    (EntityKind::Outlet, Some(l)) => color(l),
                    (EntityKind::Outlet, None) => "#888888",
                    _ => "#cccccc",
                };
                let _ = write!(
                    h,
                    "<circle cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"{r:.1}\" fill=\"{fill}\" fill-opacity=\"0.7\"><title>{}</title></circle>",
                    esc(&p.entity_id)
                );
            }
        }
        h.push_str("</svg>\n");
    }

    fn rankings(&self, h: &mut String) {
        h.push_str("<h2>Outlet rankings per latent dimension</h2>\n");
        for r in &self.rankings {
            let _ = write!(
                h,
                "<h3>Dimension {}</h3><table><tr><th>top</th><th>middle</th><th>bottom</th></tr>",
                r.dimension + 1
            );
            let rows = r.top.len().max(r.middle.len()).max(r.bottom.len());
            let cell = |v: &[crate::latent::RankedOutlet], i: usize| {
                v.get(i)
                    .map_or_else(String::new, |o| format!("{} ({:.3})", esc(&o.outlet_id), o.score))
            };
            for i in 0..rows {
                let _ = write!(
                    h,
                    "<tr><td>{}</td><td>{}</td><td>{}</td></tr>",
                    cell(&r.top, i),
                    cell(&r.middle, i),
                    cell(&r.bottom, i)
                );
            }
            h.push_str("</table>\n");
        }
    }

    fn describe(&self, h: &mut String) {
        h.push_str("<h2>Outlet statistics by category</h2>\n<table><tr><th>category</th><th>statistic</th><th>mean</th><th>stderr</th><th>n</th></tr>");
        for a in &self.aggregates {
            let _ = write!(
                h,
                "<tr><td>{}</td><td>{}</td><td>{:.3}</td><td>{}</td><td>{}</td></tr>",
                a.category.as_str(),
                esc(&a.statistic),
                a.mean,
                opt(a.stderr),
                a.n
            );
        }
        h.push_str("</table>\n<table><tr><th>outlet</th><th>label</th><th>mentions</th><th>reaction rank</th><th>article words</th><th>quoted fraction</th></tr>");
        for s in &self.stats {
            let _ = write!(
                h,
                "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                esc(&s.outlet_id),
                s.label.as_str(),
                opt(s.mention_fraction),
                opt(s.reaction_rank_mean),
                opt(s.mean_article_words),
                opt(s.mean_quoted_fraction)
            );
        }
        h.push_str("</table>\n");
    }

    fn surprise(&self, h: &mut String) {
        h.push_str("<h2>Surprise S(B|A)</h2>\n<table><tr><th>A \\ B</th>");
        for b in Label::LABELED {
            let _ = write!(h, "<th>{}</th>", b.as_str());
        }
        h.push_str("</tr>");
        for a in Label::LABELED {
            let _ = write!(h, "<tr><th>{}</th>", a.as_str());
            for b in Label::LABELED {
                let v = self
                    .surprise
                    .iter()
                    .find(|r| r.a == a.as_str() && r.b == b.as_str())
                    .map(|r| r.surprise);
                let _ = write!(h, "<td>{}</td>", opt(v));
            }
            h.push_str("</tr>");
        }
        h.push_str("</table>\n");
    }

    fn completion(&self, h: &mut String) {
        h.push_str("<h2>Predicting quoting decisions (test set)</h2>\n<table><tr><th>method</th><th>precision</th><th>recall</th><th>F1</th><th>MCC</th></tr>");
        for (name, key) in [
            ("popularity", "popularity"),
            ("popularity + propensity", "popularity_propensity"),
            ("matrix completion", "model"),
        ] {
            let r = &self.eval[key];
            let f = |k: &str| r[k].as_f64().map_or_else(|| "&ndash;".into(), |x| format!("{x:.3}"));
            let _ = write!(
                h,
                "<tr><td>{name}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                f("precision"),
                f("recall"),
                f("f1"),
                f("mcc")
            );
        }
        let _ = writeln!(
            h,
            "</table>\n<p>Selected rank {} at &lambda; = {}.</p>",
            self.eval["selected_rank"],
            self.eval["selected_lambda"].as_f64().map_or_else(String::new, |x| format!("{x:.4}"))
        );
    }
}
