//! Outlet × quote matrix completion and its evaluation.

pub mod eval;
pub mod matrix;
pub mod model_io;
pub mod solver;

use serde::{Deserialize, Serialize};

pub use eval::{
    baseline_scores, score_entries, tune_and_evaluate, tune_threshold, BaselineMode, BaselineScorer, Confusion,
    EvalReport, Scorer,
};
pub use matrix::{build_matrix, holdout_split, Baselines, Entry, QuoteMatrix};
pub use solver::{soft_impute, soft_impute_masked, CompletionModel, SoftImputeParams};

use crate::error::{Error, Result};

/// `count` values from `hi` down to `lo`, evenly spaced in log scale.
pub fn geometric_grid(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..count)
            .map(|k| hi * (lo / hi).powf(k as f64 / (count - 1) as f64))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub rank: usize,
    pub nuclear_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub dev_mcc: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct LambdaPath {
    pub points: Vec<PathPoint>,
    pub best: usize,
    pub model: CompletionModel,
}

/// Fits every λ of the grid from largest to smallest, warm-starting each fit
/// from the previous one, and keeps the fit with the best development MCC
/// (ties go to the larger λ).
pub fn lambda_path(m: &QuoteMatrix, lambdas: &[f64], base: &SoftImputeParams, dev: &[Entry]) -> Result<LambdaPath> {
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    let mut grid = lambdas.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    let mut points = Vec::new();
    let mut best: Option<(usize, CompletionModel)> = None;
    let mut prev: Option<CompletionModel> = None;
    for &lambda in &grid {
        let p = SoftImputeParams {
            lambda,
            ..base.clone()
        };
        let model = soft_impute(m, &p, prev.as_ref())?;
        let (scores, labels) = score_entries(&model, dev);
        let (threshold, dev_mcc) = tune_threshold(&scores, &labels)?;
        log::info!("lambda {lambda:.5}: rank {} dev MCC {dev_mcc:.4}", model.rank());
        points.push(PathPoint {
            lambda,
            rank: model.rank(),
            nuclear_norm: model.nuclear_norm(),
            iterations: model.iterations,
            converged: model.converged,
            dev_mcc,
            threshold,
        });
        if best.as_ref().is_none_or(|(b, _)| dev_mcc > points[*b].dev_mcc) {
            best = Some((points.len() - 1, model.clone()));
        }
        prev = Some(model);
    }
    let (best, model) = best.expect("non-empty grid");
    Ok(LambdaPath { points, best, model })
}
