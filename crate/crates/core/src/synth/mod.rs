//! Seeded synthetic data with known structure, for examples, calibration
//! and tests.

pub mod corpus;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bigraph::{BipartiteGraph, CategoryAssignment};

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:03}")).collect()
}

/// Every outlet/cluster pair is an edge independently with probability `density`.
pub fn random_graph(outlets: usize, clusters: usize, density: f64, seed: u64) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..outlets {
        for v in 0..clusters {
            if rng.random_bool(density) {
                edges.push((u, v));
            }
        }
    }
    BipartiteGraph::new(labels("o", outlets), labels("c", clusters), edges).expect("valid by construction")
}

/// Outlets of category `A` cite clusters at `a_rate`; outlets of `B` cite
/// clusters cited by some `A` outlet at `affinity` times `base_rate` and
/// other clusters at `base_rate`; neutral outlets cite at `base_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedAffinity {
    pub a_outlets: usize,
    pub b_outlets: usize,
    pub neutral_outlets: usize,
    pub clusters: usize,
    pub a_rate: f64,
    pub base_rate: f64,
    pub affinity: f64,
}

impl Default for PlantedAffinity {
    fn default() -> Self {
        PlantedAffinity {
            a_outlets: 10,
            b_outlets: 10,
            neutral_outlets: 30,
            clusters: 500,
            a_rate: 0.04,
            base_rate: 0.04,
            affinity: 3.0,
        }
    }
}

impl PlantedAffinity {
    pub fn generate(&self, seed: u64) -> (BipartiteGraph, CategoryAssignment) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.a_outlets + self.b_outlets + self.neutral_outlets;
        let mut edges = Vec::new();
        let mut cited_by_a = vec![false; self.clusters];
        for u in 0..self.a_outlets {
            for (v, hit) in cited_by_a.iter_mut().enumerate() {
                if rng.random_bool(self.a_rate) {
                    edges.push((u, v));
                    *hit = true;
                }
            }
        }
        let boosted = (self.base_rate * self.affinity).min(1.0);
        for u in self.a_outlets..n {
            let is_b = u < self.a_outlets + self.b_outlets;
            for (v, &hit) in cited_by_a.iter().enumerate() {
                let p = if is_b && hit { boosted } else { self.base_rate };
                if rng.random_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        let cats = (0..n)
            .map(|u| {
                Some(if u < self.a_outlets {
                    "A"
                } else if u < self.a_outlets + self.b_outlets {
                    "B"
                } else {
                    "N"
                })
                .map(str::to_string)
            })
            .collect();
        let g = BipartiteGraph::new(labels("o", n), labels("c", self.clusters), edges).expect("valid");
        (g, CategoryAssignment::new(cats))
    }
}

/// Outlets drawn into `k` equally sized random categories named `c0..`.
pub fn random_categories(outlets: usize, k: usize, seed: u64) -> CategoryAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CategoryAssignment::new((0..outlets).map(|_| Some(format!("c{}", rng.random_range(0..k)))).collect())
}

/// Disjoint diagonal blocks: block `b` has `outlets` rows citing its own
/// `clusters` columns with probability `density`. Every outlet cites at
/// least one cluster of its block. Returns the graph and the block of each
/// outlet.
pub fn block_graph(blocks: &[(usize, usize, f64)], seed: u64) -> (BipartiteGraph, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut row0, mut col0) = (0, 0);
    let mut edges = BTreeSet::new();
    let mut block_of = Vec::new();
    for (b, &(n, m, density)) in blocks.iter().enumerate() {
        for u in row0..row0 + n {
            block_of.push(b);
            for v in col0..col0 + m {
                if rng.random_bool(density) {
                    edges.insert((u, v));
                }
            }
            edges.insert((u, col0 + rng.random_range(0..m)));
        }
        row0 += n;
        col0 += m;
    }
    let g = BipartiteGraph::new(labels("o", row0), labels("c", col0), edges.into_iter().collect()).expect("valid");
    (g, block_of)
}

/// Binary matrix from a low-rank logistic model:
/// `logit p_ij = strength * <u_i, v_j> / sqrt(rank) + a_i + b_j + offset`
/// with standard normal factors, normal main effects with standard deviation
/// `main_sd`, and `offset` chosen so the expected positive rate is `rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedLogistic {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub strength: f64,
    pub main_sd: f64,
    pub rate: f64,
}

impl Default for PlantedLogistic {
    fn default() -> Self {
        PlantedLogistic {
            rows: 100,
            cols: 2000,
            rank: 3,
            strength: 3.0,
            main_sd: 0.5,
            rate: 0.02,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl PlantedLogistic {
    /// Positions of the ones.
    pub fn generate(&self, seed: u64) -> Vec<(usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut rng)).collect() };
        let u = draw(self.rows * self.rank);
        let v = draw(self.cols * self.rank);
        let main = Normal::new(0.0, self.main_sd).expect("main_sd >= 0");
        let a: Vec<f64> = (0..self.rows).map(|_| main.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..self.cols).map(|_| main.sample(&mut rng)).collect();
        let scale = self.strength / (self.rank as f64).sqrt();
        let mut base = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let dot: f64 = (0..self.rank).map(|k| u[i * self.rank + k] * v[j * self.rank + k]).sum();
                base.push(scale * dot + a[i] + b[j]);
            }
        }
        let mean_rate = |c: f64| base.iter().map(|&x| sigmoid(x + c)).sum::<f64>() / base.len() as f64;
        let (mut lo, mut hi) = (-30.0, 30.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mean_rate(mid) < self.rate {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let offset = 0.5 * (lo + hi);
        let mut cells = Vec::new();
        for (k, &x) in base.iter().enumerate() {
            if rng.random_bool(sigmoid(x + offset)) {
                cells.push((k / self.cols, k % self.cols));
            }
        }
        cells
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_rate_close_to_target() {
        let p = PlantedLogistic {
            rows: 50,
            cols: 400,
            ..Default::default()
        };
        let cells = p.generate(1);
        let rate = cells.len() as f64 / (50.0 * 400.0);
        assert!((rate - 0.02).abs() < 0.006, "rate {rate}");
        assert_eq!(p.generate(1), cells);
    }

    #[test]
    fn planted_graph_shapes() {
        let (g, cats) = PlantedAffinity::default().generate(3);
        assert_eq!(g.outlets().len(), 50);
        assert_eq!(g.clusters().len(), 500);
        assert_eq!(cats.members("A").len(), 10);
        let (g, block_of) = block_graph(&[(3, 10, 0.3), (4, 20, 0.2)], 1);
        assert_eq!(block_of, [0, 0, 0, 1, 1, 1, 1]);
        assert!(g.edges().iter().all(|&(u, v)| (u < 3) == (v < 10)));
    }
}
