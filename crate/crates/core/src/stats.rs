//! Small descriptive and rank statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// 0-based positions in ascending order; tied values share the mean of the
/// positions they occupy. NaNs are not supported.
pub fn mean_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j - 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} vs {} observations", x.len(), y.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input vector"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    /// Two-sided p-value from the t approximation with `n - 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

/// Spearman's rank correlation (Pearson on mean ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} vs {} observations", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::UndefinedCorrelation("fewer than 3 observations"));
    }
    let rho = pearson(&mean_ranks(x), &mean_ranks(y))?;
    let df = (n - 2) as f64;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(Correlation { rho, p_value, n })
}

/// Mean and standard error of the mean (sample sd / sqrt(n)); the error is
/// `None` below two observations.
pub fn mean_stderr(values: &[f64]) -> Option<(f64, Option<f64>)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Some((mean, None));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, Some((var / n).sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(mean_ranks(&[3.0, 1.0, 2.0]), [2.0, 0.0, 1.0]);
        assert_eq!(mean_ranks(&[1.0, 1.0, 5.0, 0.0]), [1.5, 1.5, 3.0, 0.0]);
    }

    #[test]
    fn spearman_extremes() {
        let x = [0.3, -1.0, 2.5, 7.0, 0.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(spearman(&x, &x).unwrap().rho, 1.0);
        assert_eq!(spearman(&x, &neg).unwrap().rho, -1.0);
        assert_eq!(spearman(&x, &x).unwrap().p_value, 0.0);
        assert!(matches!(spearman(&x, &[1.0; 5]), Err(Error::UndefinedCorrelation(_))));
        assert!(spearman(&x[..2], &x[..2]).is_err());
    }

    #[test]
    fn p_value_reference() {
        // rho = 0.5 with n = 12: t = 0.5 * sqrt(10 / 0.75) = 1.8257, two-sided p = 0.0979.
        let x: Vec<f64> = (0..12).map(f64::from).collect();
        let dist = StudentsT::new(0.0, 1.0, 10.0).unwrap();
        let t = 0.5 * (10.0f64 / 0.75).sqrt();
        assert!((2.0 * dist.sf(t) - 0.0979).abs() < 1e-3);
        let c = spearman(&x, &x.iter().map(|v| v * v).collect::<Vec<_>>()).unwrap();
        assert_eq!(c.rho, 1.0);
    }

    #[test]
    fn stderr_matches_hand_value() {
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((se.unwrap() - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mean_stderr(&[7.0]), Some((7.0, None)));
        assert_eq!(mean_stderr(&[]), None);
    }

    proptest! {
        #[test]
        fn monotone_invariance(v in proptest::collection::vec((-50i32..50, -50i32..50), 3..40)) {
            let x: Vec<f64> = v.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = v.iter().map(|p| p.1 as f64).collect();
            let (Ok(a), Ok(b)) = (spearman(&x, &y), spearman(&x.iter().map(|t| t.powi(3) + 2.0).collect::<Vec<_>>(), &y.iter().map(|t| t.exp()).collect::<Vec<_>>())) else {
                return Ok(());
            };
            prop_assert!((-1.0..=1.0).contains(&a.rho));
            prop_assert!((a.rho - b.rho).abs() < 1e-12);
        }
    }
}
