//! Predicting held-out citations with nuclear-norm matrix completion.
//!
//! A binary outlet × quote matrix is drawn from a low-rank logistic model.
//! A random 20% of entries is hidden, half for tuning λ and the cutoff, half
//! for testing; the completed matrix is compared with two baselines.
//!
//! ```text
//! cargo run --release --example matrix_completion
//! ```

use quotus::complete::solver::spectral_norm;
use quotus::complete::{
    baseline_scores, build_matrix, geometric_grid, lambda_path, tune_and_evaluate, BaselineMode, Baselines,
    SoftImputeParams,
};
use quotus::synth::PlantedLogistic;

fn main() -> quotus::Result<()> {
    let planted = PlantedLogistic {
        rows: 60,
        cols: 800,
        ..Default::default()
    };
    let cells = planted.generate(5);
    let holdout = planted.rows * planted.cols / 5;
    let (m, dev, test) = build_matrix(planted.rows, planted.cols, &cells, holdout, 6)?;
    println!(
        "{}x{} matrix, {} ones, {} dev and {} test entries",
        m.nrows(),
        m.ncols(),
        cells.len(),
        dev.len(),
        test.len()
    );

    let sigma = spectral_norm(m.x_tilde());
    let lambdas = geometric_grid(0.9 * sigma, 0.05 * sigma, 10);
    let base = SoftImputeParams {
        max_rank: Some(10),
        max_iters: 300,
        tol: 1e-6,
        ..SoftImputeParams::new(lambdas[0], 8)
    };
    let path = lambda_path(&m, &lambdas, &base, &dev)?;
    println!("\n    lambda  rank  iters  dev MCC");
    for (k, pt) in path.points.iter().enumerate() {
        let mark = if k == path.best { " *" } else { "" };
        println!("  {:>8.4}  {:>4}  {:>5}  {:>7.3}{mark}", pt.lambda, pt.rank, pt.iterations, pt.dev_mcc);
    }

    let baselines = Baselines::new(&m);
    let reports = [
        ("completion", tune_and_evaluate(&path.model, &dev, &test)?),
        (
            "popularity",
            tune_and_evaluate(&baseline_scores(&baselines, BaselineMode::Popularity), &dev, &test)?,
        ),
        (
            "popularity+propensity",
            tune_and_evaluate(&baseline_scores(&baselines, BaselineMode::PopularityPropensity), &dev, &test)?,
        ),
    ];
    println!("\n  {:<22} precision  recall     F1    MCC", "test set");
    for (name, r) in reports {
        println!(
            "  {name:<22} {:>9.3}  {:>6.3}  {:>5.3}  {:>5.3}",
            r.precision, r.recall, r.f1, r.mcc
        );
    }
    Ok(())
}
