//! Outlet-to-quote bipartite graph, proportion scores, and the
//! degree-preserving rewiring null model.
//!
//! For categories `A` and `B` the proportion score is
//!
//! ```text
//! M(B|A) = 1/|o(A)| * sum over (u,v) in o(A) of
//!          1/|i(v)| * #{ (a,v) in i(v) : a in B, a != u }
//! ```
//!
//! where `o(A)` are the edges leaving outlets in `A` and `i(v)` the edges
//! entering cluster `v`. Surprise standardizes `M` against an ensemble of
//! graphs obtained by double-edge swaps, which keep every outlet and cluster
//! degree fixed.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::CitationEdge;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    outlets: Vec<String>,
    clusters: Vec<String>,
    /// Sorted, unique (outlet, cluster) pairs.
    edges: Vec<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(outlets: Vec<String>, clusters: Vec<String>, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            if u >= outlets.len() || v >= clusters.len() {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self::from_sorted(outlets, clusters, edges))
    }

    fn from_sorted(outlets: Vec<String>, clusters: Vec<String>, edges: Vec<(usize, usize)>) -> Self {
        let mut out_adj = vec![Vec::new(); outlets.len()];
        let mut in_adj = vec![Vec::new(); clusters.len()];
        for &(u, v) in &edges {
            out_adj[u].push(v);
            in_adj[v].push(u);
        }
        for list in &mut in_adj {
            list.sort_unstable();
        }
        BipartiteGraph {
            outlets,
            clusters,
            edges,
            out_adj,
            in_adj,
        }
    }

    /// Builds the graph from citation edges. Outlets and clusters are
    /// supplied explicitly so that isolated nodes keep their index.
    pub fn from_citations(outlets: Vec<String>, clusters: Vec<String>, edges: &[CitationEdge]) -> Result<Self> {
        let oi: HashMap<&str, usize> = outlets.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let ci: HashMap<&str, usize> = clusters.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut pairs = Vec::with_capacity(edges.len());
        for e in edges {
            let u = *oi
                .get(e.outlet_id.as_str())
                .ok_or_else(|| Error::InvalidGraph(format!("unknown outlet {}", e.outlet_id)))?;
            let v = *ci
                .get(e.cluster_id.as_str())
                .ok_or_else(|| Error::InvalidGraph(format!("unknown cluster {}", e.cluster_id)))?;
            pairs.push((u, v));
        }
        Self::new(outlets, clusters, pairs)
    }

    /// Subgraph on the given outlets (all clusters retained).
    pub fn induced_by_outlets(&self, keep: &[usize]) -> Self {
        let mut remap = vec![usize::MAX; self.outlets.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(u, _)| remap[u] != usize::MAX)
            .map(|&(u, v)| (remap[u], v))
            .collect();
        let outlets = keep.iter().map(|&i| self.outlets[i].clone()).collect();
        Self::new(outlets, self.clusters.clone(), edges).expect("subgraph of a valid graph is valid")
    }

    pub fn outlets(&self) -> &[String] {
        &self.outlets
    }

    pub fn clusters(&self) -> &[String] {
        &self.clusters
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Clusters cited by outlet `u`.
    pub fn cited_by(&self, u: usize) -> &[usize] {
        &self.out_adj[u]
    }

    /// Outlets citing cluster `v`, i.e. the tails of `i(v)`.
    pub fn citers(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.in_adj[v].binary_search(&u).is_ok()
    }

    /// Edges leaving outlets in `set`, the `o(A)` accessor.
    pub fn outbound<'a>(&'a self, set: &'a HashSet<usize>) -> impl Iterator<Item = (usize, usize)> + 'a {
        self.edges.iter().copied().filter(move |(u, _)| set.contains(u))
    }

    pub fn outlet_degrees(&self) -> Vec<usize> {
        self.out_adj.iter().map(Vec::len).collect()
    }

    pub fn cluster_degrees(&self) -> Vec<usize> {
        self.in_adj.iter().map(Vec::len).collect()
    }
}

/// Disjoint outlet categories; outlets may be left uncategorized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryAssignment {
    names: Vec<String>,
    of_outlet: Vec<Option<usize>>,
}

impl CategoryAssignment {
    pub fn new(of_outlet: Vec<Option<String>>) -> Self {
        let mut names: Vec<String> = of_outlet.iter().flatten().cloned().collect();
        names.sort();
        names.dedup();
        let of_outlet = of_outlet
            .into_iter()
            .map(|c| c.map(|c| names.binary_search(&c).unwrap()))
            .collect();
        CategoryAssignment { names, of_outlet }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn category_of(&self, outlet: usize) -> Option<&str> {
        self.of_outlet[outlet].map(|c| self.names[c].as_str())
    }

    pub fn members(&self, name: &str) -> HashSet<usize> {
        let Some(c) = self.index(name) else {
            return HashSet::new();
        };
        (0..self.of_outlet.len()).filter(|&i| self.of_outlet[i] == Some(c)).collect()
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn check_len(&self, g: &BipartiteGraph) -> Result<()> {
        if self.of_outlet.len() != g.outlets.len() {
            return Err(Error::Shape(format!(
                "{} category entries for {} outlets",
                self.of_outlet.len(),
                g.outlets.len()
            )));
        }
        Ok(())
    }
}

// M(B|A) over a raw edge list. `a`/`b` are category indices; `None` for `b`
// means a category with no members (score 0).
fn proportion_raw(
    edges: &[(usize, usize)],
    num_clusters: usize,
    cat: &[Option<usize>],
    a: usize,
    b: Option<usize>,
    indeg: &[usize],
    b_count: &mut Vec<usize>,
) -> Option<f64> {
    b_count.clear();
    b_count.resize(num_clusters, 0);
    if let Some(b) = b {
        for &(u, v) in edges {
            if cat[u] == Some(b) {
                b_count[v] += 1;
            }
        }
    }
    let mut total = 0.0;
    let mut n = 0usize;
    for &(u, v) in edges {
        if cat[u] != Some(a) {
            continue;
        }
        n += 1;
        let own = usize::from(b.is_some() && cat[u] == b);
        total += (b_count[v] - own) as f64 / indeg[v] as f64;
    }
    (n > 0).then(|| total / n as f64)
}

/// `M(B|A)`, the average share of co-citers from `B` over clusters cited by `A`.
pub fn proportion_score(g: &BipartiteGraph, cats: &CategoryAssignment, a: &str, b: &str) -> Result<f64> {
    cats.check_len(g)?;
    let ai = cats.index(a).ok_or_else(|| Error::EmptyCategory(a.to_string()))?;
    let indeg = g.cluster_degrees();
    proportion_raw(&g.edges, g.clusters.len(), &cats.of_outlet, ai, cats.index(b), &indeg, &mut Vec::new())
        .ok_or_else(|| Error::EmptyCategory(a.to_string()))
}

/// Performs `swaps` attempted double-edge swaps on `edges` in place.
/// Attempts that would collapse endpoints or duplicate an edge are skipped
/// but still counted. Returns the number of accepted swaps.
fn swap_edges(edges: &mut [(usize, usize)], num_clusters: usize, swaps: usize, rng: &mut ChaCha8Rng) -> usize {
    let n = edges.len();
    if n < 2 {
        return 0;
    }
    let mut present: HashSet<(usize, usize)>;
    let dense = edges.iter().map(|e| e.0).max().unwrap_or(0).saturating_add(1).saturating_mul(num_clusters);
    // A bitmap is far faster than hashing when the adjacency matrix is small.
    let use_bitmap = dense <= 64 << 20;
    let mut bitmap = Vec::new();
    if use_bitmap {
        bitmap = vec![0u64; dense.div_ceil(64)];
        present = HashSet::new();
        for &(u, v) in edges.iter() {
            let k = u * num_clusters + v;
            bitmap[k / 64] |= 1 << (k % 64);
        }
    } else {
        present = edges.iter().copied().collect();
    }
    let contains = |bitmap: &[u64], present: &HashSet<(usize, usize)>, u: usize, v: usize| {
        if use_bitmap {
            let k = u * num_clusters + v;
            bitmap[k / 64] >> (k % 64) & 1 == 1
        } else {
            present.contains(&(u, v))
        }
    };
    let mut accepted = 0;
    for _ in 0..swaps {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (u1, v1) = edges[i];
        let (u2, v2) = edges[j];
        if u1 == u2 || v1 == v2 {
            continue;
        }
        if contains(&bitmap, &present, u2, v1) || contains(&bitmap, &present, u1, v2) {
            continue;
        }
        if use_bitmap {
            for (u, v, on) in [(u1, v1, false), (u2, v2, false), (u2, v1, true), (u1, v2, true)] {
                let k = u * num_clusters + v;
                if on {
                    bitmap[k / 64] |= 1 << (k % 64);
                } else {
                    bitmap[k / 64] &= !(1 << (k % 64));
                }
            }
        } else {
            present.remove(&(u1, v1));
            present.remove(&(u2, v2));
            present.insert((u2, v1));
            present.insert((u1, v2));
        }
        edges[i] = (u2, v1);
        edges[j] = (u1, v2);
        accepted += 1;
    }
    accepted
}

/// A degree-preserving randomization of `g`, reproducible from `seed`.
pub fn rewire(g: &BipartiteGraph, swaps: usize, seed: u64) -> BipartiteGraph {
    let mut edges = g.edges.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    swap_edges(&mut edges, g.clusters.len(), swaps, &mut rng);
    edges.sort_unstable();
    BipartiteGraph::from_sorted(g.outlets.clone(), g.clusters.clone(), edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub num_graphs: usize,
    /// Swap attempts per graph; `None` means ten per edge.
    pub swaps_per_graph: Option<usize>,
    pub seed: u64,
}

impl EnsembleParams {
    pub fn with_seed(seed: u64) -> Self {
        EnsembleParams {
            num_graphs: 200,
            swaps_per_graph: None,
            seed,
        }
    }

    pub fn swaps_for(&self, g: &BipartiteGraph) -> usize {
        self.swaps_per_graph.unwrap_or(10 * g.num_edges())
    }
}

/// Independently rewired copies of a graph. Graph `k` is rewired from the
/// original with seed `seed + k`, so members can be produced in any order.
#[derive(Debug, Clone)]
pub struct RewireEnsemble<'g> {
    pub original: &'g BipartiteGraph,
    pub seed: u64,
    pub num_graphs: usize,
    pub swaps_per_graph: usize,
}

impl<'g> RewireEnsemble<'g> {
    pub fn new(original: &'g BipartiteGraph, p: &EnsembleParams) -> Self {
        RewireEnsemble {
            original,
            seed: p.seed,
            num_graphs: p.num_graphs,
            swaps_per_graph: p.swaps_for(original),
        }
    }

    pub fn graph(&self, k: usize) -> BipartiteGraph {
        rewire(self.original, self.swaps_per_graph, self.seed.wrapping_add(k as u64))
    }

    /// Applies `f` to every member's edge list (unsorted) in parallel and
    /// returns the results in member order.
    pub fn map_edges<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[(usize, usize)]) -> T + Sync,
    {
        (0..self.num_graphs)
            .into_par_iter()
            .map(|k| {
                let mut edges = self.original.edges.clone();
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(k as u64));
                swap_edges(&mut edges, self.original.clusters.len(), self.swaps_per_graph, &mut rng);
                f(&edges)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurpriseResult {
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    pub m_original: f64,
    pub m_null_mean: f64,
    pub m_null_var: f64,
    pub m_null_std: f64,
    pub surprise: f64,
    pub num_graphs: usize,
    pub swaps: usize,
    pub seed: u64,
}

fn summarize(a: &str, b: &str, m: f64, null: &[f64], ens: &RewireEnsemble<'_>) -> Result<SurpriseResult> {
    let n = null.len();
    if n < 2 {
        return Err(Error::DegenerateNull);
    }
    let mean = null.iter().sum::<f64>() / n as f64;
    let var = null.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::DegenerateNull);
    }
    Ok(SurpriseResult {
        a: a.to_string(),
        b: b.to_string(),
        m_original: m,
        m_null_mean: mean,
        m_null_var: var,
        m_null_std: var.sqrt(),
        surprise: (m - mean) / var.sqrt(),
        num_graphs: ens.num_graphs,
        swaps: ens.swaps_per_graph,
        seed: ens.seed,
    })
}

/// Surprise `S(B|A)`: the standardized deviation of `M(B|A)` from its mean
/// over the rewiring ensemble (unbiased variance).
pub fn surprise(
    g: &BipartiteGraph,
    cats: &CategoryAssignment,
    a: &str,
    b: &str,
    p: &EnsembleParams,
) -> Result<SurpriseResult> {
    let m = proportion_score(g, cats, a, b)?;
    let ai = cats.index(a).expect("checked by proportion_score");
    let bi = cats.index(b);
    let indeg = g.cluster_degrees();
    let ens = RewireEnsemble::new(g, p);
    let null = ens.map_edges(|edges| {
        proportion_raw(edges, g.clusters.len(), &cats.of_outlet, ai, bi, &indeg, &mut Vec::new())
            .expect("rewiring keeps outlet degrees")
    });
    summarize(a, b, m, &null, &ens)
}

/// Surprise for every ordered pair of the given categories, sharing one
/// ensemble. Pairs whose score is undefined are returned as errors.
pub fn surprise_table(
    g: &BipartiteGraph,
    cats: &CategoryAssignment,
    names: &[&str],
    p: &EnsembleParams,
) -> Result<BTreeMap<(String, String), Result<SurpriseResult>>> {
    cats.check_len(g)?;
    let idx: Vec<Option<usize>> = names.iter().map(|n| cats.index(n)).collect();
    let indeg = g.cluster_degrees();
    let ens = RewireEnsemble::new(g, p);
    let k = names.len();
    let score_all = |edges: &[(usize, usize)]| {
        let mut scratch = Vec::new();
        let mut out = vec![None; k * k];
        for (x, a) in idx.iter().enumerate() {
            let Some(a) = *a else { continue };
            for (y, b) in idx.iter().enumerate() {
                out[x * k + y] = proportion_raw(edges, g.clusters.len(), &cats.of_outlet, a, *b, &indeg, &mut scratch);
            }
        }
        out
    };
    let original = score_all(&g.edges);
    let null = ens.map_edges(score_all);
    let mut table = BTreeMap::new();
    for (x, a) in names.iter().enumerate() {
        for (y, b) in names.iter().enumerate() {
            let res = match original[x * k + y] {
                None => Err(Error::EmptyCategory(a.to_string())),
                Some(m) => {
                    let series: Vec<f64> = null.iter().map(|r| r[x * k + y].expect("degrees fixed")).collect();
                    summarize(a, b, m, &series, &ens)
                }
            };
            table.insert((a.to_string(), b.to_string()), res);
        }
    }
    Ok(table)
}
