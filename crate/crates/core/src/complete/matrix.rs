use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A held-out matrix position and its true value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub label: bool,
}

/// Binary outlet × cluster citation matrix with an observation mask.
///
/// `x_bar` scales each column by `1 / sqrt(column citations)` and `x_tilde`
/// scales each row of `x_bar` to unit length. Both are computed from
/// observed entries only and are zero at held-out positions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteMatrix {
    x: DMatrix<f64>,
    observed: DMatrix<bool>,
    x_bar: DMatrix<f64>,
    x_tilde: DMatrix<f64>,
}

impl QuoteMatrix {
    /// `cells` are the positions of ones; all other positions are zero.
    pub fn from_cells(rows: usize, cols: usize, cells: &[(usize, usize)], held_out: &[(usize, usize)]) -> Result<Self> {
        let mut x = DMatrix::zeros(rows, cols);
        for &(i, j) in cells {
            if i >= rows || j >= cols {
                return Err(Error::Shape(format!("cell ({i}, {j}) outside {rows}x{cols}")));
            }
            x[(i, j)] = 1.0;
        }
        let mut observed = DMatrix::from_element(rows, cols, true);
        for &(i, j) in held_out {
            if i >= rows || j >= cols {
                return Err(Error::Shape(format!("held-out ({i}, {j}) outside {rows}x{cols}")));
            }
            observed[(i, j)] = false;
        }
        Ok(Self::with_mask(x, observed))
    }

    pub fn with_mask(x: DMatrix<f64>, observed: DMatrix<bool>) -> Self {
        assert_eq!(x.shape(), observed.shape());
        let (n, m) = x.shape();
        let mut x_bar = DMatrix::zeros(n, m);
        for j in 0..m {
            let total: f64 = (0..n).filter(|&i| observed[(i, j)]).map(|i| x[(i, j)]).sum();
            if total > 0.0 {
                let w = total.sqrt();
                for i in (0..n).filter(|&i| observed[(i, j)]) {
                    x_bar[(i, j)] = x[(i, j)] / w;
                }
            }
        }
        let mut x_tilde = x_bar.clone();
        for i in 0..n {
            let norm = x_bar.row(i).norm();
            if norm > 0.0 {
                x_tilde.row_mut(i).unscale_mut(norm);
            }
        }
        QuoteMatrix {
            x,
            observed,
            x_bar,
            x_tilde,
        }
    }

    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    /// True values at every position, held-out ones included.
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn observed(&self) -> &DMatrix<bool> {
        &self.observed
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.observed[(i, j)]
    }

    pub fn x_bar(&self) -> &DMatrix<f64> {
        &self.x_bar
    }

    /// Zero-filled `P_Ω(X̃)`.
    pub fn x_tilde(&self) -> &DMatrix<f64> {
        &self.x_tilde
    }

    pub fn num_observed(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }
}

/// Samples `count` distinct positions uniformly; the first `count / 2`
/// (rounded down) form the development set and the rest the test set.
pub fn holdout_split(rows: usize, cols: usize, count: usize, seed: u64) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    let total = rows * cols;
    if count >= total {
        return Err(Error::InvalidParameter(format!(
            "holdout count {count} must be smaller than the {total} matrix entries"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked: Vec<(usize, usize)> = sample(&mut rng, total, count)
        .into_iter()
        .map(|k| (k / cols, k % cols))
        .collect();
    let dev = picked[..count / 2].to_vec();
    let test = picked[count / 2..].to_vec();
    Ok((dev, test))
}

/// Builds the matrix with a random holdout and returns the labelled
/// development and test entries.
pub fn build_matrix(
    rows: usize,
    cols: usize,
    cells: &[(usize, usize)],
    holdout_count: usize,
    seed: u64,
) -> Result<(QuoteMatrix, Vec<Entry>, Vec<Entry>)> {
    let (dev, test) = holdout_split(rows, cols, holdout_count, seed)?;
    let held: Vec<(usize, usize)> = dev.iter().chain(&test).copied().collect();
    let m = QuoteMatrix::from_cells(rows, cols, cells, &held)?;
    let label = |v: Vec<(usize, usize)>| -> Vec<Entry> {
        v.into_iter()
            .map(|(row, col)| Entry {
                row,
                col,
                label: m.x[(row, col)] > 0.5,
            })
            .collect()
    };
    let (dev, test) = (label(dev), label(test));
    Ok((m, dev, test))
}

/// Per-cluster popularity and per-outlet propensity over observed entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub mu_q: Vec<f64>,
    pub mu_s: Vec<f64>,
}

impl Baselines {
    pub fn new(m: &QuoteMatrix) -> Self {
        let (n, k) = (m.nrows(), m.ncols());
        let mean = |vals: &mut dyn Iterator<Item = f64>| {
            let (mut s, mut c) = (0.0, 0usize);
            for v in vals {
                s += v;
                c += 1;
            }
            if c == 0 {
                0.0
            } else {
                s / c as f64
            }
        };
        let mu_q = (0..k)
            .map(|j| mean(&mut (0..n).filter(|&i| m.is_observed(i, j)).map(|i| m.x[(i, j)])))
            .collect();
        let mu_s = (0..n)
            .map(|i| mean(&mut (0..k).filter(|&j| m.is_observed(i, j)).map(|j| m.x[(i, j)])))
            .collect();
        Baselines { mu_q, mu_s }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_weights_and_row_norms() {
        // Column 0 cited by 4 outlets.
        let cells = [(0, 0), (1, 0), (2, 0), (3, 0), (0, 1)];
        let m = QuoteMatrix::from_cells(4, 3, &cells, &[]).unwrap();
        assert_eq!(m.x_bar()[(1, 0)], 0.5);
        assert_eq!(m.x_bar()[(0, 1)], 1.0);
        assert_eq!(m.x_bar().column(2).sum(), 0.0);
        for i in 0..4 {
            assert!((m.x_tilde().row(i).norm() - 1.0).abs() < 1e-15);
        }
        assert_eq!(m.x_tilde()[(1, 0)], 1.0);
    }

    #[test]
    fn holdout_counts() {
        let (dev, test) = holdout_split(3, 4, 10, 1).unwrap();
        assert_eq!((dev.len(), test.len()), (5, 5));
        let mut all: Vec<_> = dev.iter().chain(&test).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 10);
        assert!(holdout_split(3, 4, 12, 1).is_err());
        let (dev, test) = holdout_split(3, 4, 7, 1).unwrap();
        assert_eq!((dev.len(), test.len()), (3, 4));
    }

    #[test]
    fn held_out_values_do_not_leak() {
        let cells = [(0, 0), (1, 0), (2, 1), (1, 2)];
        let held = [(1, 0), (2, 2)];
        let a = QuoteMatrix::from_cells(3, 3, &cells, &held).unwrap();
        // Flip both held-out values.
        let flipped = [(0, 0), (2, 1), (1, 2), (2, 2)];
        let b = QuoteMatrix::from_cells(3, 3, &flipped, &held).unwrap();
        assert_eq!(a.x_tilde(), b.x_tilde());
        assert_eq!(Baselines::new(&a), Baselines::new(&b));
        assert_eq!(a.x_tilde()[(1, 0)], 0.0);
    }

    #[test]
    fn baselines_over_observed() {
        let cells = [(0, 0), (1, 0), (2, 0)];
        let m = QuoteMatrix::from_cells(3, 2, &cells, &[(2, 1)]).unwrap();
        let b = Baselines::new(&m);
        assert_eq!(b.mu_q, [1.0, 0.0]);
        assert_eq!(b.mu_s, [0.5, 0.5, 1.0]);
    }
}
