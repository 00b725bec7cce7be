use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::{report, Stage, Workdir};
use crate::align::{extract_quotes, match_all, QuoteMatch, QuoteOccurrence};
use crate::bigraph::{surprise_table, BipartiteGraph, CategoryAssignment};
use crate::cluster::{cluster_matches, earliest_edges, CitationEdge, QuoteCluster};
use crate::complete::model_io::{read_model, write_model};
use crate::complete::solver::spectral_norm;
use crate::complete::{
    baseline_scores, build_matrix, lambda_path, tune_and_evaluate, BaselineMode, Baselines, Entry, EvalReport,
    PathPoint, QuoteMatrix,
};
use crate::corpus::{load_articles, load_outlets, load_transcripts, Article, Label, Outlet, Transcript};
use crate::dedup::{dedup_articles, DroppedArticle};
use crate::describe::{category_aggregates, outlet_stats, reaction_ranks, ArticleFacts, MentionCount};
use crate::error::{Error, Result};
use crate::latent::{
    correlate, decompose, dominant_topic_matrix, embedding_records, negation_feature, negation_values,
    project_features, rank_outlets, word_feature_matrix, LatentSource, OutletRanking, Projection,
};
use crate::records::{read_json, read_records, write_json, write_records};

/// Counts reported by a finished stage, in a fixed order.
pub type Summary = Vec<(&'static str, usize)>;

/// `graph.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub outlets: Vec<String>,
    pub clusters: Vec<String>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MentionRecord {
    outlet_id: String,
    #[serde(flatten)]
    counts: MentionCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IngestSummary {
    transcripts: usize,
    outlets: usize,
    articles_total: usize,
    articles_with_keyword: usize,
    articles_kept: usize,
    duplicates_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SkippedPair {
    #[serde(rename = "A")]
    a: String,
    #[serde(rename = "B")]
    b: String,
    reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CompleteSettings {
    holdout_count: usize,
    holdout_seed: u64,
    solver_seed: u64,
    lambdas: Vec<f64>,
    max_rank: Option<usize>,
    max_iters: usize,
    tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MatrixShape {
    rows: usize,
    cols: usize,
    positives: usize,
    observed: usize,
    dev: usize,
    test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CompleteReport {
    config: CompleteSettings,
    matrix: MatrixShape,
    path: Vec<PathPoint>,
    selected_lambda: f64,
    selected_rank: usize,
    model: EvalReport,
    popularity: EvalReport,
    popularity_propensity: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LatentSummary {
    source: LatentSource,
    rank: usize,
    singular_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CorrelationRecord {
    feature: String,
    dimension: usize,
    rho: f64,
    p_value: f64,
    n: usize,
}

/// Runs one stage against the config's workdir.
pub fn run_stage(stage: Stage, cfg: &PipelineConfig) -> Result<Summary> {
    let wd = Workdir::new(&cfg.paths.workdir);
    wd.check_ready(stage)?;
    log::info!("stage {stage}");
    match stage {
        Stage::Ingest => ingest(cfg, &wd),
        Stage::Match => match_stage(cfg, &wd),
        Stage::Cluster => cluster(cfg, &wd),
        Stage::Graph => graph(&wd),
        Stage::Describe => describe(cfg, &wd),
        Stage::Surprise => surprise(cfg, &wd),
        Stage::Complete => complete(cfg, &wd),
        Stage::Latent => latent(cfg, &wd),
        Stage::Report => report::run(cfg, &wd),
    }
}

fn values<T>(recs: Vec<(usize, T)>) -> Vec<T> {
    recs.into_iter().map(|(_, r)| r).collect()
}

pub(super) fn read_outlets(wd: &Workdir) -> Result<Vec<Outlet>> {
    load_outlets(&wd.path("outlets.jsonl"))
}

pub(super) fn read_transcripts(cfg: &PipelineConfig, wd: &Workdir) -> Result<Vec<Transcript>> {
    load_transcripts(&wd.path("transcripts.jsonl"), cfg.corpus.speaker.as_deref(), &cfg.tokenizer)
}

fn read_articles(wd: &Workdir, outlets: &[Outlet]) -> Result<Vec<Article>> {
    load_articles(&wd.path("articles.jsonl"), outlets, None)
}

pub(super) fn read_matches(wd: &Workdir) -> Result<Vec<QuoteMatch>> {
    Ok(values(read_records(&wd.path("matches.jsonl"))?))
}

pub(super) fn read_clusters(wd: &Workdir) -> Result<Vec<QuoteCluster>> {
    Ok(values(read_records(&wd.path("clusters.jsonl"))?))
}

pub(super) fn read_edges(wd: &Workdir) -> Result<Vec<CitationEdge>> {
    Ok(values(read_records(&wd.path("edges.jsonl"))?))
}

fn read_graph(wd: &Workdir) -> Result<BipartiteGraph> {
    let g: GraphRecord = read_json(&wd.path("graph.json"))?;
    BipartiteGraph::new(g.outlets, g.clusters, g.edges)
}

fn ingest(cfg: &PipelineConfig, wd: &Workdir) -> Result<Summary> {
    cfg.check_inputs()?;
    std::fs::create_dir_all(wd.root()).map_err(|e| Error::io(wd.root(), e))?;
    let paths = &cfg.paths;
    let outlets = load_outlets(&paths.outlets).map_err(|e| e.in_file(&paths.outlets))?;
    let transcripts = load_transcripts(&paths.transcripts, cfg.corpus.speaker.as_deref(), &cfg.tokenizer)
        .map_err(|e| e.in_file(&paths.transcripts))?;
    let all = load_articles(&paths.articles, &outlets, None).map_err(|e| e.in_file(&paths.articles))?;

    let keyword = cfg.mention_keyword().unwrap_or("");
    let mut mentions: BTreeMap<&str, MentionCount> = outlets.iter().map(|o| (o.id.as_str(), MentionCount::default())).collect();
    for a in &all {
        let m = mentions.get_mut(a.outlet_id.as_str()).expect("outlets validated");
        m.total += 1;
        m.mentioning += usize::from(a.mentions(keyword));
    }
    let filtered: Vec<Article> = match cfg.corpus.keyword.as_deref() {
        Some(k) => all.iter().filter(|a| a.mentions(k)).cloned().collect(),
        None => all.clone(),
    };
    let dd = dedup_articles(&filtered, &cfg.dedup.params())?;

    write_records(&wd.path("transcripts.jsonl"), &transcripts.iter().map(Transcript::to_record).collect::<Vec<_>>())?;
    write_records(&wd.path("outlets.jsonl"), &outlets)?;
    write_records(&wd.path("articles.jsonl"), &dd.kept)?;
    let mut dropped: Vec<DroppedArticle> = dd.dropped.clone();
    dropped.sort_by(|a, b| a.dropped_id.cmp(&b.dropped_id));
    write_records(&wd.path("dedup.jsonl"), &dropped)?;
    let mention_recs: Vec<MentionRecord> = mentions
        .into_iter()
        .map(|(o, counts)| MentionRecord {
            outlet_id: o.to_string(),
            counts,
        })
        .collect();
    write_records(&wd.path("mentions.jsonl"), &mention_recs)?;
    let summary = IngestSummary {
        transcripts: transcripts.len(),
        outlets: outlets.len(),
        articles_total: all.len(),
        articles_with_keyword: filtered.len(),
        articles_kept: dd.kept.len(),
        duplicates_dropped: dropped.len(),
    };
    write_json(&wd.path("ingest.json"), &summary)?;
    Ok(vec![
        ("transcripts", summary.transcripts),
        ("outlets", summary.outlets),
        ("articles", summary.articles_total),
        ("with_keyword", summary.articles_with_keyword),
        ("kept", summary.articles_kept),
        ("duplicates", summary.duplicates_dropped),
    ])
}

fn match_stage(cfg: &PipelineConfig, wd: &Workdir) -> Result<Summary> {
    let params = cfg.align.params();
    let transcripts = read_transcripts(cfg, wd)?;
    let outlets = read_outlets(wd)?;
    let articles = read_articles(wd, &outlets)?;
    let occurrences: Vec<QuoteOccurrence> = articles
        .iter()
        .flat_map(|a| extract_quotes(a, &cfg.tokenizer, &params))
        .collect();
    let matches = match_all(&occurrences, &transcripts, &params);
    write_records(&wd.path("occurrences.jsonl"), &occurrences)?;
    write_records(&wd.path("matches.jsonl"), &matches)?;
    Ok(vec![("occurrences", occurrences.len()), ("matches", matches.len())])
}

fn cluster(cfg: &PipelineConfig, wd: &Workdir) -> Result<Summary> {
    let matches = read_matches(wd)?;
    let outlets = read_outlets(wd)?;
    let articles = read_articles(wd, &outlets)?;
    let clusters = cluster_matches(&matches, cfg.cluster.min_overlap)?;
    let edges = earliest_edges(&clusters, &matches, &articles);
    write_records(&wd.path("clusters.jsonl"), &clusters)?;
    write_records(&wd.path("edges.jsonl"), &edges)?;
    Ok(vec![("clusters", clusters.len()), ("edges", edges.len())])
}

fn graph(wd: &Workdir) -> Result<Summary> {
    let outlets = read_outlets(wd)?;
    let clusters = read_clusters(wd)?;
    let edges = read_edges(wd)?;
    let g = BipartiteGraph::from_citations(
        outlets.into_iter().map(|o| o.id).collect(),
        clusters.into_iter().map(|c| c.cluster_id).collect(),
        &edges,
    )?;
    let rec = GraphRecord {
        outlets: g.outlets().to_vec(),
        clusters: g.clusters().to_vec(),
        edges: g.edges().to_vec(),
    };
    write_json(&wd.path("graph.json"), &rec)?;
    Ok(vec![
        ("outlets", g.outlets().len()),
        ("clusters", g.clusters().len()),
        ("edges", g.num_edges()),
    ])
}

fn labeled_ids(outlets: &[Outlet]) -> HashSet<String> {
    outlets
        .iter()
        .filter(|o| o.label != Label::Unlabeled)
        .map(|o| o.id.clone())
        .collect()
}

fn describe(cfg: &PipelineConfig, wd: &Workdir) -> Result<Summary> {
    let outlets = read_outlets(wd)?;
    let articles = read_articles(wd, &outlets)?;
    let occurrences: Vec<QuoteOccurrence> = values(read_records(&wd.path("occurrences.jsonl"))?);
    let matches = read_matches(wd)?;
    let edges = read_edges(wd)?;
    let mentions: HashMap<String, MentionCount> = values::<MentionRecord>(read_records(&wd.path("mentions.jsonl"))?)
        .into_iter()
        .map(|m| (m.outlet_id, m.counts))
        .collect();

    let span_of: HashMap<&str, (usize, usize)> =
        occurrences.iter().map(|o| (o.id.as_str(), o.article_span)).collect();
    let mut spans: HashMap<&str, Vec<(usize, usize)>> = HashMap::new();
    for m in &matches {
        if let Some(&s) = span_of.get(m.occurrence_id.as_str()) {
            spans.entry(m.article_id.as_str()).or_default().push(s);
        }
    }
    let facts: Vec<ArticleFacts> = articles
        .iter()
        .map(|a| ArticleFacts {
            outlet_id: a.outlet_id.clone(),
            tokens: cfg.tokenizer.tokenize(&a.body).len(),
            matched_spans: spans.remove(a.id.as_str()).unwrap_or_default(),
        })
        .collect();
    let labeled = labeled_ids(&outlets);
    let reaction = reaction_ranks(&edges, cfg.describe.min_citers, Some(&labeled))?;
    let stats = outlet_stats(&outlets, &mentions, &facts, &reaction);
    let aggregates = category_aggregates(&stats);
    write_records(&wd.path("stats.jsonl"), &stats)?;
    write_records(&wd.path("stats_categories.jsonl"), &aggregates)?;
    Ok(vec![("outlets", stats.len()), ("aggregates", aggregates.len())])
}

fn surprise(cfg: &PipelineConfig, wd: &Workdir) -> Result<Summary> {
    let outlets = read_outlets(wd)?;
    let g = read_graph(wd)?;
    let label_of: HashMap<&str, Label> = outlets.iter().map(|o| (o.id.as_str(), o.label)).collect();
    let keep: Vec<usize> = (0..g.outlets().len())
        .filter(|&i| label_of.get(g.outlets()[i].as_str()).is_some_and(|&l| l != Label::Unlabeled))
        .collect();
    let sub = g.induced_by_outlets(&keep);
    let cats = CategoryAssignment::new(
        sub.outlets()
            .iter()
            .map(|o| Some(label_of[o.as_str()].as_str().to_string()))
            .collect(),
    );
    let names: Vec<&str> = Label::LABELED.iter().map(|l| l.as_str()).collect();
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    if sub.num_edges() < 2 {
        for a in &names {
            for b in &names {
                skipped.push(SkippedPair {
                    a: a.to_string(),
                    b: b.to_string(),
                    reason: "fewer than two edges among labeled outlets".into(),
                });
            }
        }
    } else {
        let table = surprise_table(&sub, &cats, &names, &cfg.surprise_params(sub.num_edges()))?;
        for ((a, b), res) in table {
            match res {
                Ok(r) => ok.push(r),
                Err(e) => {
                    log::warn!("surprise {b}|{a} skipped: {e}");
                    skipped.push(SkippedPair { a, b, reason: e.to_string() });
                }
            }
        }
    }
    write_records(&wd.path("surprise.jsonl"), &ok)?;
    write_records(&wd.path("surprise_skipped.jsonl"), &skipped)?;
    Ok(vec![("pairs", ok.len()), ("skipped", skipped.len())])
}

struct Problem {
    graph: BipartiteGraph,
    matrix: QuoteMatrix,
    dev: Vec<Entry>,
    test: Vec<Entry>,
    holdout: usize,
}

fn problem(cfg: &PipelineConfig, wd: &Workdir) -> Result<Problem> {
    let graph = read_graph(wd)?;
    let (rows, cols) = (graph.outlets().len(), graph.clusters().len());
    let holdout = cfg.holdout_count(rows * cols);
    let (matrix, dev, test) = build_matrix(rows, cols, graph.edges(), holdout, cfg.holdout_seed())?;
    Ok(Problem {
        graph,
        matrix,
        dev,
        test,
        holdout,
    })
}

fn complete(cfg: &PipelineConfig, wd: &Workdir) -> Result<Summary> {
    let p = problem(cfg, wd)?;
    let lambdas = if cfg.complete.lambdas.is_empty() {
        let top = spectral_norm(p.matrix.x_tilde());
        cfg.complete.lambda_fractions.iter().map(|f| f * top).collect()
    } else {
        cfg.complete.lambdas.clone()
    };
    let base = cfg.solver_params();
    let path = lambda_path(&p.matrix, &lambdas, &base, &p.dev)?;
    let model_eval = tune_and_evaluate(&path.model, &p.dev, &p.test)?;
    let baselines = Baselines::new(&p.matrix);
    let pop = tune_and_evaluate(&baseline_scores(&baselines, BaselineMode::Popularity), &p.dev, &p.test)?;
    let prop = tune_and_evaluate(&baseline_scores(&baselines, BaselineMode::PopularityPropensity), &p.dev, &p.test)?;
    let selected = &path.points[path.best];
    let report = CompleteReport {
        config: CompleteSettings {
            holdout_count: p.holdout,
            holdout_seed: cfg.holdout_seed(),
            solver_seed: base.seed,
            lambdas: path.points.iter().map(|pt| pt.lambda).collect(),
            max_rank: base.max_rank,
            max_iters: base.max_iters,
            tol: base.tol,
        },
        matrix: MatrixShape {
            rows: p.matrix.nrows(),
            cols: p.matrix.ncols(),
            positives: p.graph.num_edges(),
            observed: p.matrix.num_observed(),
            dev: p.dev.len(),
            test: p.test.len(),
        },
        selected_lambda: selected.lambda,
        selected_rank: selected.rank,
        path: path.points.clone(),
        model: model_eval,
        popularity: pop,
        popularity_propensity: prop,
    };
    write_model(&wd.path("model.txt"), &path.model)?;
    write_json(&wd.path("eval.json"), &report)?;
    Ok(vec![("rank", selected.rank), ("lambdas", lambdas.len()), ("test_entries", p.test.len())])
}

fn latent(cfg: &PipelineConfig, wd: &Workdir) -> Result<Summary> {
    let lc = &cfg.latent;
    let p = problem(cfg, wd)?;
    let model = match lc.source {
        LatentSource::Model => Some(read_model(&wd.path("model.txt"))?),
        LatentSource::ZeroFilled => None,
    };
    let mut source = lc.source;
    let mut ls = decompose(&p.matrix, lc.dimensions, model.as_ref());
    if ls.rank() == 0 && source == LatentSource::Model {
        log::warn!("selected completion model has rank 0; using the zero-filled matrix for the latent space");
        source = LatentSource::ZeroFilled;
        ls = decompose(&p.matrix, lc.dimensions, None);
    }
    if ls.rank() == 0 {
        return Err(Error::InvalidParameter("latent space is empty: the observed matrix has rank 0".into()));
    }
    let clusters = read_clusters(wd)?;
    let transcripts = read_transcripts(cfg, wd)?;
    let cluster_ids: Vec<String> = p.graph.clusters().to_vec();
    let order: HashMap<&str, usize> = cluster_ids.iter().enumerate().map(|(j, c)| (c.as_str(), j)).collect();
    let mut aligned: Vec<Option<QuoteCluster>> = vec![None; cluster_ids.len()];
    for c in clusters {
        if let Some(&j) = order.get(c.cluster_id.as_str()) {
            aligned[j] = Some(c);
        }
    }
    let clusters: Vec<QuoteCluster> = aligned
        .into_iter()
        .map(|c| c.ok_or_else(|| Error::Shape("graph and cluster artifacts disagree".into())))
        .collect::<Result<_>>()?;

    let mut features: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    features.insert(
        "negation".into(),
        negation_values(&clusters, &transcripts)?.into_iter().map(Some).collect(),
    );
    let mut topics = BTreeMap::new();
    for path in &cfg.paths.features {
        for (name, vals) in crate::latent::load_features(path, &cluster_ids).map_err(|e| e.in_file(path))? {
            if name.starts_with(&lc.topic_prefix) {
                topics.insert(name, vals);
            } else {
                features.insert(name, vals);
            }
        }
    }

    let mut projections: Vec<Projection> = vec![project_features(&negation_feature(&clusters, &transcripts)?, &ls)?];
    let words = word_feature_matrix(&clusters, &transcripts, lc.word_min_clusters, lc.word_max_clusters)?;
    projections.push(project_features(&words, &ls)?);
    if !topics.is_empty() {
        projections.push(project_features(&dominant_topic_matrix(&topics, lc.topic_margin)?, &ls)?);
    }

    let mut correlations = Vec::new();
    for (name, vals) in &features {
        for dim in 0..ls.rank() {
            match correlate(vals, &ls, dim) {
                Ok(c) => correlations.push(CorrelationRecord {
                    feature: name.clone(),
                    dimension: dim,
                    rho: c.rho,
                    p_value: c.p_value,
                    n: c.n,
                }),
                Err(e) => log::warn!("correlation of {name} with dimension {dim}: {e}"),
            }
        }
    }
    let rankings: Vec<OutletRanking> = (0..ls.rank())
        .map(|d| rank_outlets(&ls, p.graph.outlets(), d, lc.rank_k))
        .collect::<Result<_>>()?;
    let embeddings = embedding_records(&ls, p.graph.outlets(), &cluster_ids, &projections);

    write_json(
        &wd.path("latent.json"),
        &LatentSummary {
            source,
            rank: ls.rank(),
            singular_values: ls.s.iter().copied().collect(),
        },
    )?;
    write_records(&wd.path("embeddings.jsonl"), &embeddings)?;
    write_records(&wd.path("correlations.jsonl"), &correlations)?;
    write_json(&wd.path("rankings.json"), &rankings)?;
    Ok(vec![
        ("rank", ls.rank()),
        ("embeddings", embeddings.len()),
        ("correlations", correlations.len()),
    ])
}
