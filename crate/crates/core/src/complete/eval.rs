//! Threshold-tuned binary evaluation of entry scores.

use serde::{Deserialize, Serialize};

use crate::complete::matrix::{Baselines, Entry};
use crate::error::{Error, Result};

/// Ranking score for a matrix position; larger means "more likely cited".
pub trait Scorer {
    fn score(&self, row: usize, col: usize) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// `μ^q_j`
    Popularity,
    /// `μ^q_j + μ^s_i`
    PopularityPropensity,
}

#[derive(Debug, Clone, Copy)]
pub struct BaselineScorer<'a> {
    pub baselines: &'a Baselines,
    pub mode: BaselineMode,
}

impl Scorer for BaselineScorer<'_> {
    fn score(&self, row: usize, col: usize) -> f64 {
        let q = self.baselines.mu_q[col];
        match self.mode {
            BaselineMode::Popularity => q,
            BaselineMode::PopularityPropensity => q + self.baselines.mu_s[row],
        }
    }
}

pub fn baseline_scores(baselines: &Baselines, mode: BaselineMode) -> BaselineScorer<'_> {
    BaselineScorer { baselines, mode }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    /// Predicted positive iff `score >= threshold`.
    pub fn at_threshold(scores: &[f64], labels: &[bool], threshold: f64) -> Self {
        let mut c = Confusion::default();
        for (&s, &y) in scores.iter().zip(labels) {
            match (s >= threshold, y) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    /// Zero when nothing is predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// Zero when there are no positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Matthews correlation; zero when any marginal is empty.
    pub fn mcc(&self) -> f64 {
        let (tp, fp, tn, fn_) = (self.tp as f64, self.fp as f64, self.tn as f64, self.fn_ as f64);
        let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        if den == 0.0 {
            0.0
        } else {
            (tp * tn - fp * fn_) / den.sqrt()
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub threshold: f64,
    #[serde(flatten)]
    pub counts: Confusion,
}

impl EvalReport {
    pub fn new(counts: Confusion, threshold: f64) -> Self {
        EvalReport {
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
            mcc: counts.mcc(),
            threshold,
            counts,
        }
    }
}

/// The threshold among the distinct scores maximizing MCC; ties go to the
/// higher threshold. Returns `(threshold, mcc)`.
pub fn tune_threshold(scores: &[f64], labels: &[bool]) -> Result<(f64, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    let pos = labels.iter().filter(|&&y| y).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        tn: neg,
        fn_: pos,
    };
    let mut best: Option<(f64, f64)> = None;
    let mut k = 0;
    while k < order.len() {
        let t = scores[order[k]];
        while k < order.len() && scores[order[k]] == t {
            if labels[order[k]] {
                c.tp += 1;
                c.fn_ -= 1;
            } else {
                c.fp += 1;
                c.tn -= 1;
            }
            k += 1;
        }
        let m = c.mcc();
        if best.is_none_or(|(_, b)| m > b) {
            best = Some((t, m));
        }
    }
    Ok(best.expect("non-empty scores"))
}

/// Labels and scores of entries under `scorer`.
pub fn score_entries(scorer: &dyn Scorer, entries: &[Entry]) -> (Vec<f64>, Vec<bool>) {
    entries.iter().map(|e| (scorer.score(e.row, e.col), e.label)).unzip()
}

/// Tunes the cutoff on `dev` and reports metrics on `test` at that cutoff.
pub fn tune_and_evaluate(scorer: &dyn Scorer, dev: &[Entry], test: &[Entry]) -> Result<EvalReport> {
    let (ds, dl) = score_entries(scorer, dev);
    let (threshold, _) = tune_threshold(&ds, &dl)?;
    let (ts, tl) = score_entries(scorer, test);
    Ok(EvalReport::new(Confusion::at_threshold(&ts, &tl, threshold), threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_constant_scores() {
        let labels = [true, false, false, true, false];
        let perfect: Vec<f64> = labels.iter().map(|&y| f64::from(u8::from(y))).collect();
        let (t, m) = tune_threshold(&perfect, &labels).unwrap();
        assert_eq!((t, m), (1.0, 1.0));
        let r = EvalReport::new(Confusion::at_threshold(&perfect, &labels, t), t);
        assert_eq!((r.mcc, r.f1), (1.0, 1.0));

        let (t, m) = tune_threshold(&[0.3; 5], &labels).unwrap();
        assert_eq!((t, m), (0.3, 0.0));
        assert_eq!(Confusion::at_threshold(&[0.3; 5], &labels, t).mcc(), 0.0);
    }

    #[test]
    fn single_class_is_error() {
        let err = tune_threshold(&[0.1, 0.2], &[true, true]).unwrap_err();
        assert!(err.to_string().contains("threshold tuning undefined"));
    }

    #[test]
    fn ties_prefer_higher_threshold() {
        // Both candidate cutoffs give MCC 0.
        let (t, m) = tune_threshold(&[0.9, 0.9, 0.1, 0.1], &[true, false, true, false]).unwrap();
        assert_eq!((t, m), (0.9, 0.0));
        let (t, _) = tune_threshold(&[0.9, 0.8, 0.7, 0.6], &[false, true, true, false]).unwrap();
        assert_eq!(t, 0.7);
    }

    #[test]
    fn baselines_score_formulas() {
        let b = Baselines {
            mu_q: vec![0.2, 1.0],
            mu_s: vec![0.1, 0.3],
        };
        let pop = baseline_scores(&b, BaselineMode::Popularity);
        assert_eq!(pop.score(0, 1), pop.score(1, 1));
        assert_eq!(pop.score(0, 1), 1.0);
        let pp = baseline_scores(&b, BaselineMode::PopularityPropensity);
        assert_eq!(pp.score(1, 0), 0.2 + 0.3);
    }
}
