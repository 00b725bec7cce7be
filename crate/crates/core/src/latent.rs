//! Latent space of the normalized citation matrix: outlet and quote
//! embeddings, feature projections, and feature/dimension correlations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cluster::QuoteCluster;
use crate::complete::{CompletionModel, QuoteMatrix};
use crate::corpus::Transcript;
use crate::error::{Error, Result};
use crate::records::read_records;
use crate::stats::{spearman, Correlation};
use crate::tokenize::is_negation;

/// Components with a singular value at or below this relative size are dropped.
const RANK_TOL: f64 = 1e-10;

/// `X = U diag(S) Vᵀ` truncated to `r` components.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSpace {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentSource {
    /// Factors of the selected completion model.
    #[default]
    Model,
    /// SVD of the zero-filled observed matrix.
    ZeroFilled,
}

impl LatentSpace {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// Keeps at most `r` leading components with positive singular values
    /// and flips signs so each column of `V` has a positive largest-magnitude
    /// entry (first such entry on ties).
    fn normalized(mut u: DMatrix<f64>, s: DVector<f64>, mut v: DMatrix<f64>, r: usize) -> Self {
        let top = s.iter().copied().fold(0.0, f64::max);
        let keep = s.iter().take(r).take_while(|&&x| x > RANK_TOL * top.max(1.0)).count();
        if keep < r {
            log::warn!("requested {r} latent dimensions, numerical rank allows {keep}");
        }
        u = u.columns(0, keep).into_owned();
        v = v.columns(0, keep).into_owned();
        let s = s.rows(0, keep).into_owned();
        for k in 0..keep {
            let col = v.column(k);
            let mut best = 0;
            for i in 1..col.len() {
                if col[i].abs() > col[best].abs() {
                    best = i;
                }
            }
            if col.len() > 0 && col[best] < 0.0 {
                v.column_mut(k).neg_mut();
                u.column_mut(k).neg_mut();
            }
        }
        LatentSpace { u, s, v }
    }

    pub fn from_dense(x: &DMatrix<f64>, r: usize) -> Self {
        let svd = x.clone().svd(true, true);
        let u = svd.u.expect("requested");
        let v = svd.v_t.expect("requested").transpose();
        Self::normalized(u, svd.singular_values, v, r)
    }

    /// The completion model's own factors, already in SVD form.
    pub fn from_model(model: &CompletionModel, r: usize) -> Self {
        Self::normalized(model.u.clone(), model.d.clone(), model.v.clone(), r)
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (k, mut c) in us.column_iter_mut().enumerate() {
            c *= self.s[k];
        }
        us * self.v.transpose()
    }
}

/// Top-`r` decomposition of the zero-filled `X̃`, or of the model factors
/// when a model is supplied.
pub fn decompose(m: &QuoteMatrix, r: usize, model: Option<&CompletionModel>) -> LatentSpace {
    match model {
        Some(model) => LatentSpace::from_model(model, r),
        None => LatentSpace::from_dense(m.x_tilde(), r),
    }
}

/// Features × clusters, each nonzero row scaled to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub name: String,
    pub rows: Vec<String>,
    pub f: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn new(name: impl Into<String>, rows: Vec<String>, mut raw: DMatrix<f64>) -> Result<Self> {
        if rows.len() != raw.nrows() {
            return Err(Error::Shape(format!("{} labels for {} feature rows", rows.len(), raw.nrows())));
        }
        for mut row in raw.row_iter_mut() {
            let total = row.sum();
            if total != 0.0 {
                row.unscale_mut(total);
            }
        }
        Ok(FeatureMatrix {
            name: name.into(),
            rows,
            f: raw,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub rows: Vec<String>,
    /// Features × r.
    pub l: DMatrix<f64>,
}

/// `L = F̃ V S⁻¹`.
pub fn project_features(f: &FeatureMatrix, ls: &LatentSpace) -> Result<Projection> {
    if f.f.ncols() != ls.v.nrows() {
        return Err(Error::Shape(format!(
            "features cover {} clusters, latent space {}",
            f.f.ncols(),
            ls.v.nrows()
        )));
    }
    if ls.s.iter().any(|&x| x == 0.0) {
        return Err(Error::RankDeficient);
    }
    let mut l = &f.f * &ls.v;
    for (k, mut c) in l.column_iter_mut().enumerate() {
        c.unscale_mut(ls.s[k]);
    }
    Ok(Projection {
        rows: f.rows.clone(),
        l,
    })
}

fn span_tokens<'a>(c: &QuoteCluster, by_id: &HashMap<&str, &'a Transcript>) -> Result<&'a [String]> {
    let tr = by_id
        .get(c.transcript_id.as_str())
        .ok_or_else(|| Error::InvalidParameter(format!("cluster {} names unknown transcript", c.cluster_id)))?;
    tr.tokens
        .get(c.span_start..c.span_end)
        .ok_or_else(|| Error::InvalidParameter(format!("cluster {} span outside transcript", c.cluster_id)))
}

/// 1 where the cluster's transcript span contains a negation token, else 0.
pub fn negation_values(clusters: &[QuoteCluster], transcripts: &[Transcript]) -> Result<Vec<f64>> {
    let by_id: HashMap<&str, &Transcript> = transcripts.iter().map(|t| (t.id.as_str(), t)).collect();
    clusters
        .iter()
        .map(|c| Ok(f64::from(u8::from(span_tokens(c, &by_id)?.iter().any(|t| is_negation(t))))))
        .collect()
}

pub fn negation_feature(clusters: &[QuoteCluster], transcripts: &[Transcript]) -> Result<FeatureMatrix> {
    let vals = negation_values(clusters, transcripts)?;
    FeatureMatrix::new(
        "negation",
        vec!["negation".into()],
        DMatrix::from_row_slice(1, vals.len(), &vals),
    )
}

/// Binary bag of words and bigrams over cluster spans, restricted to terms
/// occurring in between `min_df` and `max_df` clusters.
pub fn word_feature_matrix(
    clusters: &[QuoteCluster],
    transcripts: &[Transcript],
    min_df: usize,
    max_df: usize,
) -> Result<FeatureMatrix> {
    let by_id: HashMap<&str, &Transcript> = transcripts.iter().map(|t| (t.id.as_str(), t)).collect();
    let mut postings: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (j, c) in clusters.iter().enumerate() {
        let toks = span_tokens(c, &by_id)?;
        for t in toks {
            postings.entry(t.clone()).or_default().insert(j);
        }
        for w in toks.windows(2) {
            postings.entry(format!("{} {}", w[0], w[1])).or_default().insert(j);
        }
    }
    postings.retain(|_, docs| (min_df..=max_df).contains(&docs.len()));
    let mut f = DMatrix::zeros(postings.len(), clusters.len());
    for (i, docs) in postings.values().enumerate() {
        for &j in docs {
            f[(i, j)] = 1.0;
        }
    }
    FeatureMatrix::new("words", postings.into_keys().collect(), f)
}

/// One line of a features file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub cluster_id: String,
    pub feature_name: String,
    pub value: f64,
}

/// Per-feature values aligned with `cluster_ids`; clusters without a value
/// for a feature are `None`. Records for unknown clusters are skipped.
pub fn load_features(path: &Path, cluster_ids: &[String]) -> Result<BTreeMap<String, Vec<Option<f64>>>> {
    let index: HashMap<&str, usize> = cluster_ids.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut out: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    let mut unknown = 0usize;
    for (line, rec) in read_records::<FeatureRecord>(path)? {
        if !rec.value.is_finite() {
            return Err(Error::Malformed {
                line,
                message: "non-finite feature value".into(),
            });
        }
        let Some(&j) = index.get(rec.cluster_id.as_str()) else {
            unknown += 1;
            continue;
        };
        out.entry(rec.feature_name).or_insert_with(|| vec![None; cluster_ids.len()])[j] = Some(rec.value);
    }
    if unknown > 0 {
        log::warn!("{}: {unknown} feature records reference unknown clusters", path.display());
    }
    Ok(out)
}

/// Topic–cluster indicator matrix: cluster `j` belongs to its highest-weight
/// topic when that weight exceeds the runner-up by more than `margin`.
pub fn dominant_topic_matrix(topics: &BTreeMap<String, Vec<Option<f64>>>, margin: f64) -> Result<FeatureMatrix> {
    let names: Vec<String> = topics.keys().cloned().collect();
    let ncols = topics.values().next().map_or(0, Vec::len);
    let mut t = DMatrix::zeros(names.len(), ncols);
    for j in 0..ncols {
        let mut w: Vec<(f64, usize)> = names
            .iter()
            .enumerate()
            .filter_map(|(i, n)| topics[n][j].map(|v| (v, i)))
            .collect();
        w.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let dominant = match w.as_slice() {
            [] => None,
            [(_, i)] => Some(*i),
            [(a, i), (b, _), ..] => (a - b > margin).then_some(*i),
        };
        if let Some(i) = dominant {
            t[(i, j)] = 1.0;
        }
    }
    FeatureMatrix::new("topics", names, t)
}

/// Spearman correlation between per-cluster feature values and cluster
/// coordinates on dimension `dim` (0-based). Clusters lacking a value are
/// left out.
pub fn correlate(values: &[Option<f64>], ls: &LatentSpace, dim: usize) -> Result<Correlation> {
    if dim >= ls.rank() {
        return Err(Error::InvalidParameter(format!("dimension {dim} beyond rank {}", ls.rank())));
    }
    if values.len() != ls.v.nrows() {
        return Err(Error::Shape(format!("{} values for {} clusters", values.len(), ls.v.nrows())));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = values
        .iter()
        .enumerate()
        .filter_map(|(j, v)| v.map(|v| (v, ls.v[(j, dim)])))
        .unzip();
    spearman(&x, &y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedOutlet {
    pub outlet_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutletRanking {
    pub dimension: usize,
    /// All outlets, highest score first.
    pub ranked: Vec<RankedOutlet>,
    pub top: Vec<RankedOutlet>,
    /// The `k` outlets closest to zero, in descending score order.
    pub middle: Vec<RankedOutlet>,
    /// Lowest score last.
    pub bottom: Vec<RankedOutlet>,
}

/// Outlets ordered by `U[:, dim] · S[dim]`, ties broken by id.
pub fn rank_outlets(ls: &LatentSpace, outlet_ids: &[String], dim: usize, k: usize) -> Result<OutletRanking> {
    if dim >= ls.rank() {
        return Err(Error::InvalidParameter(format!("dimension {dim} beyond rank {}", ls.rank())));
    }
    if outlet_ids.len() != ls.u.nrows() {
        return Err(Error::Shape(format!("{} ids for {} outlets", outlet_ids.len(), ls.u.nrows())));
    }
    let mut ranked: Vec<RankedOutlet> = outlet_ids
        .iter()
        .enumerate()
        .map(|(i, id)| RankedOutlet {
            outlet_id: id.clone(),
            score: ls.u[(i, dim)] * ls.s[dim],
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.outlet_id.cmp(&b.outlet_id)));
    let k = k.min(ranked.len());
    let mut middle = ranked.clone();
    middle.sort_by(|a, b| a.score.abs().total_cmp(&b.score.abs()).then_with(|| a.outlet_id.cmp(&b.outlet_id)));
    middle.truncate(k);
    middle.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.outlet_id.cmp(&b.outlet_id)));
    Ok(OutletRanking {
        dimension: dim,
        top: ranked[..k].to_vec(),
        bottom: ranked[ranked.len() - k..].to_vec(),
        middle,
        ranked,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Outlet,
    Cluster,
    Feature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub entity_id: String,
    pub kind: EntityKind,
    pub coordinates: Vec<f64>,
}

/// Outlets as rows of `U`, clusters as rows of `V`, features as rows of
/// their projections `L`; all three live in the same coordinate system.
pub fn embedding_records(
    ls: &LatentSpace,
    outlet_ids: &[String],
    cluster_ids: &[String],
    projections: &[Projection],
) -> Vec<EmbeddingRecord> {
    let rows = |m: &DMatrix<f64>, i: usize| m.row(i).iter().copied().collect::<Vec<f64>>();
    let mut out = Vec::new();
    for (i, id) in outlet_ids.iter().enumerate() {
        out.push(EmbeddingRecord {
            entity_id: id.clone(),
            kind: EntityKind::Outlet,
            coordinates: rows(&ls.u, i),
        });
    }
    for (j, id) in cluster_ids.iter().enumerate() {
        out.push(EmbeddingRecord {
            entity_id: id.clone(),
            kind: EntityKind::Cluster,
            coordinates: rows(&ls.v, j),
        });
    }
    for p in projections {
        for (i, id) in p.rows.iter().enumerate() {
            out.push(EmbeddingRecord {
                entity_id: id.clone(),
                kind: EntityKind::Feature,
                coordinates: rows(&p.l, i),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::Tokenizer;

    fn ortho_check(ls: &LatentSpace) {
        let r = ls.rank();
        assert!((ls.u.transpose() * &ls.u - DMatrix::identity(r, r)).norm() < 1e-8);
        assert!((ls.v.transpose() * &ls.v - DMatrix::identity(r, r)).norm() < 1e-8);
    }

    #[test]
    fn rank_one_matrix() {
        let u = DVector::from_vec(vec![1.0, -2.0, 2.0]);
        let v = DVector::from_vec(vec![0.0, 3.0, -4.0, 0.0]);
        let ls = LatentSpace::from_dense(&(&u * v.transpose()), 3);
        assert_eq!(ls.rank(), 1);
        assert!((ls.s[0] - 15.0).abs() < 1e-12);
        // Largest |v| entry (-4) must come out positive.
        assert!((ls.v[(2, 0)] - 0.8).abs() < 1e-12);
        assert!((ls.u[(1, 0)] - 2.0 / 3.0).abs() < 1e-12);
        ortho_check(&ls);
    }

    #[test]
    fn full_rank_reconstruction_and_determinism() {
        let x = DMatrix::from_fn(5, 7, |i, j| ((i * 31 + j * 17) % 11) as f64 - 5.0);
        let ls = LatentSpace::from_dense(&x, 5);
        assert!((ls.reconstruct() - &x).norm() < 1e-8);
        ortho_check(&ls);
        assert_eq!(LatentSpace::from_dense(&x, 5), ls);
    }

    #[test]
    fn projection_examples() {
        let x = DMatrix::from_fn(4, 6, |i, j| ((i * 7 + j * 5) % 9) as f64);
        let ls = LatentSpace::from_dense(&x, 3);
        // F̃ = s_1 v_1ᵀ gives L = e_1; rows are not rescaled when passed directly.
        let row = ls.v.column(1).transpose() * ls.s[1];
        let f = FeatureMatrix {
            name: "t".into(),
            rows: vec!["a".into(), "zero".into()],
            f: DMatrix::from_fn(2, 6, |i, j| if i == 0 { row[j] } else { 0.0 }),
        };
        let p = project_features(&f, &ls).unwrap();
        assert!((p.l.row(0) - DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 0.0])).norm() < 1e-12);
        assert_eq!(p.l.row(1).norm(), 0.0);

        let mut bad = ls.clone();
        bad.s[2] = 0.0;
        assert!(matches!(project_features(&f, &bad), Err(Error::RankDeficient)));
    }

    #[test]
    fn feature_rows_sum_to_one() {
        let f = FeatureMatrix::new("t", vec!["a".into(), "b".into()], DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 2.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(f.f.row(0).sum(), 1.0);
        assert_eq!(f.f.row(1).sum(), 0.0);
    }

    fn cluster(id: &str, start: usize, end: usize) -> QuoteCluster {
        QuoteCluster {
            cluster_id: id.into(),
            transcript_id: "t".into(),
            span_start: start,
            span_end: end,
            member_occurrence_ids: vec![],
        }
    }

    #[test]
    fn negation_examples() {
        let tr = Transcript::new(
            "t",
            0,
            vec![("P".into(), "we don't quit we will succeed this is not over".into())],
            None,
            &Tokenizer::default(),
        );
        let cs = [cluster("a", 0, 3), cluster("b", 3, 6), cluster("c", 6, 10)];
        assert_eq!(negation_values(&cs, &[tr.clone()]).unwrap(), [1.0, 0.0, 1.0]);
        let f = negation_feature(&cs, &[tr.clone()]).unwrap();
        assert_eq!(f.f.row(0).sum(), 1.0);
        let w = word_feature_matrix(&cs, &[tr], 2, 3).unwrap();
        assert_eq!(w.rows, ["we"]);
    }

    #[test]
    fn dominant_topics_respect_margin() {
        let mut t = BTreeMap::new();
        t.insert("econ".to_string(), vec![Some(0.7), Some(0.45), None]);
        t.insert("war".to_string(), vec![Some(0.2), Some(0.4), Some(0.9)]);
        let m = dominant_topic_matrix(&t, 0.1).unwrap();
        assert_eq!(m.f.row(0).iter().copied().collect::<Vec<_>>(), [1.0, 0.0, 0.0]);
        assert_eq!(m.f.row(1).iter().copied().collect::<Vec<_>>(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn ranking_top_middle_bottom() {
        let ls = LatentSpace {
            u: DMatrix::from_column_slice(5, 1, &[0.5, -0.1, 0.05, -0.6, 0.2]),
            s: DVector::from_vec(vec![2.0]),
            v: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
        };
        let ids: Vec<String> = ["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect();
        let r = rank_outlets(&ls, &ids, 0, 2).unwrap();
        let names = |v: &[RankedOutlet]| v.iter().map(|o| o.outlet_id.clone()).collect::<Vec<_>>();
        assert_eq!(names(&r.top), ["a", "e"]);
        assert_eq!(names(&r.middle), ["c", "b"]);
        assert_eq!(names(&r.bottom), ["b", "d"]);
        assert_eq!(r.ranked[0].score, 1.0);

        let single = LatentSpace {
            u: DMatrix::from_element(1, 1, 1.0),
            s: DVector::from_element(1, 1.0),
            v: DMatrix::from_element(1, 1, 1.0),
        };
        let r = rank_outlets(&single, &ids[..1], 0, 3).unwrap();
        assert_eq!(names(&r.top), ["a"]);
    }

    #[test]
    fn correlation_with_own_coordinate() {
        let x = DMatrix::from_fn(4, 8, |i, j| ((i * 3 + j * 7) % 5) as f64 + (i == j) as u8 as f64);
        let ls = LatentSpace::from_dense(&x, 2);
        let vals: Vec<Option<f64>> = ls.v.column(0).iter().map(|&v| Some(v)).collect();
        assert_eq!(correlate(&vals, &ls, 0).unwrap().rho, 1.0);
        let neg: Vec<Option<f64>> = vals.iter().map(|v| v.map(|v| -v)).collect();
        assert_eq!(correlate(&neg, &ls, 0).unwrap().rho, -1.0);
    }
}
