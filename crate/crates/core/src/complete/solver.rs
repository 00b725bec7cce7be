//! Nuclear-norm regularized completion by alternating ridge regressions.
//!
//! Minimizes `1/2 ||P_Ω(X - Z)||² + λ ||Z||_*` over `Z` of rank at most `r`
//! through the factorization `Z = A Bᵀ` with `A = U D`, `B = V D`, where `D`
//! holds the square roots of the singular values of `Z`. Each half step
//! solves a ridge problem for one factor against the filled-in matrix
//! `X* = P_Ω(X) + P_Ω⊥(Z)` and re-orthogonalizes through a small SVD. A final
//! soft-thresholded SVD of `X* V` gives the returned factors.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complete::eval::Scorer;
use crate::complete::matrix::QuoteMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoftImputeParams {
    pub lambda: f64,
    /// Factorization rank; `None` means `min(rows, cols)`.
    #[serde(default)]
    pub max_rank: Option<usize>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Stop once the relative objective decrease falls below this.
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub seed: u64,
}

fn default_max_iters() -> usize {
    500
}

fn default_tol() -> f64 {
    1e-9
}

impl SoftImputeParams {
    pub fn new(lambda: f64, seed: u64) -> Self {
        SoftImputeParams {
            lambda,
            max_rank: None,
            max_iters: default_max_iters(),
            tol: default_tol(),
            seed,
        }
    }
}

/// `X̂ = U diag(D) Vᵀ` with orthonormal `U`, `V` and positive, non-increasing `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionModel {
    pub u: DMatrix<f64>,
    pub d: DVector<f64>,
    pub v: DMatrix<f64>,
    pub lambda: f64,
    /// Objective after every iteration, ending with the returned solution.
    pub objective: Vec<f64>,
    pub iterations: usize,
    /// False when `max_iters` was reached before the tolerance.
    pub converged: bool,
}

impl CompletionModel {
    pub fn zero(rows: usize, cols: usize, lambda: f64, objective: f64) -> Self {
        CompletionModel {
            u: DMatrix::zeros(rows, 0),
            d: DVector::zeros(0),
            v: DMatrix::zeros(cols, 0),
            lambda,
            objective: vec![objective],
            iterations: 0,
            converged: true,
        }
    }

    pub fn rank(&self) -> usize {
        self.d.len()
    }

    pub fn predict(&self, i: usize, j: usize) -> f64 {
        (0..self.rank()).map(|k| self.u[(i, k)] * self.d[k] * self.v[(j, k)]).sum()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut ud = self.u.clone();
        for (k, mut col) in ud.column_iter_mut().enumerate() {
            col *= self.d[k];
        }
        ud * self.v.transpose()
    }

    pub fn nuclear_norm(&self) -> f64 {
        self.d.sum()
    }
}

impl Scorer for CompletionModel {
    fn score(&self, row: usize, col: usize) -> f64 {
        self.predict(row, col)
    }
}

fn masked(target: &DMatrix<f64>, mask: &DMatrix<bool>) -> DMatrix<f64> {
    target.zip_map(mask, |x, o| if o { x } else { 0.0 })
}

fn fill(target: &DMatrix<f64>, mask: &DMatrix<bool>, z: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = z.clone();
    for ((o, &t), &keep) in out.iter_mut().zip(target.iter()).zip(mask.iter()) {
        if keep {
            *o = t;
        }
    }
    out
}

/// `1/2 ||P_Ω(X - Z)||² + λ nuclear`, with the nuclear norm of `Z` supplied.
fn objective_with(target: &DMatrix<f64>, mask: &DMatrix<bool>, z: &DMatrix<f64>, lambda: f64, nuclear: f64) -> f64 {
    let mut loss = 0.0;
    for ((&t, &zz), &o) in target.iter().zip(z.iter()).zip(mask.iter()) {
        if o {
            loss += (t - zz) * (t - zz);
        }
    }
    0.5 * loss + lambda * nuclear
}

/// The convex objective evaluated at `z`.
pub fn objective(target: &DMatrix<f64>, mask: &DMatrix<bool>, z: &DMatrix<f64>, lambda: f64) -> f64 {
    let nuclear = z.clone().singular_values().sum();
    objective_with(target, mask, z, lambda, nuclear)
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Singular values shrunk by `lambda` and clipped at zero.
pub fn soft_threshold_svd(m: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let s = svd.singular_values.map(|x| (x - lambda).max(0.0));
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let mut us = u;
    for (k, mut col) in us.column_iter_mut().enumerate() {
        col *= s[k];
    }
    us * vt
}

/// `||Z - S_λ(P_Ω(X) + P_Ω⊥(Z))||_F`, zero exactly at the optimum.
pub fn fixed_point_residual(target: &DMatrix<f64>, mask: &DMatrix<bool>, model: &CompletionModel) -> f64 {
    let z = model.reconstruct();
    let step = soft_threshold_svd(&fill(target, mask, &z), model.lambda);
    (z - step).norm()
}

fn random_orthonormal(rows: usize, cols: usize, against: Option<&DMatrix<f64>>, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
    match against {
        None => g.qr().q(),
        Some(base) if base.ncols() > 0 => {
            let k = base.ncols();
            let stacked = DMatrix::from_fn(rows, k + cols, |i, j| if j < k { base[(i, j)] } else { g[(i, j - k)] });
            stacked.qr().q().columns(k, cols).into_owned()
        }
        Some(_) => g.qr().q(),
    }
}

fn scale_columns(m: &mut DMatrix<f64>, s: &DVector<f64>) {
    for (k, mut col) in m.column_iter_mut().enumerate() {
        col *= s[k];
    }
}

// U diag(D²) Vᵀ.
fn product(u: &DMatrix<f64>, d: &DVector<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let mut ud = u.clone();
    scale_columns(&mut ud, &d.map(|x| x * x));
    ud * v.transpose()
}

/// Fits the model to `P_Ω(target)`. A warm start reuses the factors of a
/// previous solution (typically at a larger λ).
pub fn soft_impute_masked(
    target: &DMatrix<f64>,
    mask: &DMatrix<bool>,
    p: &SoftImputeParams,
    warm: Option<&CompletionModel>,
) -> Result<CompletionModel> {
    if !(p.lambda >= 0.0) {
        return Err(Error::InvalidParameter("lambda must be >= 0".into()));
    }
    if target.shape() != mask.shape() {
        return Err(Error::Shape("target and mask differ in shape".into()));
    }
    if !mask.iter().any(|&o| o) {
        return Err(Error::InvalidParameter("no observed entries".into()));
    }
    let (n, m) = target.shape();
    let xo = masked(target, mask);
    let sigma_max = spectral_norm(&xo);
    if p.lambda >= sigma_max {
        return Ok(CompletionModel::zero(n, m, p.lambda, 0.5 * xo.norm_squared()));
    }

    let full = n.min(m);
    let r = p.max_rank.unwrap_or(full).clamp(1, full);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (mut u, mut d, mut v) = match warm.filter(|w| w.rank() > 0) {
        Some(w) => {
            let k = w.rank().min(r);
            let base = w.u.columns(0, k).into_owned();
            let pad = random_orthonormal(n, r - k, Some(&base), &mut rng);
            let u = DMatrix::from_fn(n, r, |i, j| if j < k { base[(i, j)] } else { pad[(i, j - k)] });
            let d = DVector::from_fn(r, |j, _| if j < k { w.d[j].sqrt() } else { 1.0 });
            let v = DMatrix::from_fn(m, r, |i, j| if j < k { w.v[(i, j)] } else { 0.0 });
            (u, d, v)
        }
        None => (random_orthonormal(n, r, None, &mut rng), DVector::from_element(r, 1.0), DMatrix::zeros(m, r)),
    };

    let lambda = p.lambda;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < p.max_iters {
        iterations += 1;
        let shrink = d.map(|x| x / (x * x + lambda));

        // B step: B̃ᵀ = (D² + λI)⁻¹ D Uᵀ X*.
        let xs = fill(target, mask, &product(&u, &d, &v));
        let mut bt = (u.transpose() * &xs).transpose();
        scale_columns(&mut bt, &shrink);
        scale_columns(&mut bt, &d);
        let svd = bt.svd(true, true);
        v = svd.u.expect("requested");
        let r_t = svd.v_t.expect("requested");
        d = svd.singular_values.map(f64::sqrt);
        u = &u * r_t.transpose();

        // A step, symmetric.
        let shrink = d.map(|x| x / (x * x + lambda));
        let xs = fill(target, mask, &product(&u, &d, &v));
        let mut a = &xs * &v;
        scale_columns(&mut a, &shrink);
        scale_columns(&mut a, &d);
        let svd = a.svd(true, true);
        u = svd.u.expect("requested");
        let r_t = svd.v_t.expect("requested");
        d = svd.singular_values.map(f64::sqrt);
        v = &v * r_t.transpose();

        let z = product(&u, &d, &v);
        let f = objective_with(target, mask, &z, lambda, d.norm_squared());
        let prev = trace.last().copied();
        trace.push(f);
        if let Some(prev) = prev {
            if (prev - f).abs() <= p.tol * prev.abs().max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        log::warn!("soft-impute reached {} iterations at lambda {lambda} without converging", p.max_iters);
    }

    let xs = fill(target, mask, &product(&u, &d, &v));
    let svd = (&xs * &v).svd(true, true);
    let s = svd.singular_values.map(|x| (x - lambda).max(0.0));
    let keep = s.iter().take_while(|&&x| x > 0.0).count();
    let u_new = svd.u.expect("requested").columns(0, keep).into_owned();
    let v_new = (&v * svd.v_t.expect("requested").transpose()).columns(0, keep).into_owned();
    let d_new = s.rows(0, keep).into_owned();
    let mut model = CompletionModel {
        u: u_new,
        d: d_new,
        v: v_new,
        lambda,
        objective: trace,
        iterations,
        converged,
    };
    let z = model.reconstruct();
    let f = objective_with(target, mask, &z, lambda, model.nuclear_norm());
    model.objective.push(f);
    Ok(model)
}

/// Fits `P_Ω(X̃)` of a quote matrix.
pub fn soft_impute(m: &QuoteMatrix, p: &SoftImputeParams, warm: Option<&CompletionModel>) -> Result<CompletionModel> {
    soft_impute_masked(m.x_tilde(), m.observed(), p, warm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random(n: usize, m: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn large_lambda_gives_zero() {
        let x = random(6, 5, 1);
        let mask = DMatrix::from_element(6, 5, true);
        let p = SoftImputeParams::new(spectral_norm(&x), 0);
        let model = soft_impute_masked(&x, &mask, &p, None).unwrap();
        assert_eq!(model.rank(), 0);
        assert_eq!(model.reconstruct(), DMatrix::zeros(6, 5));
    }

    #[test]
    fn zero_lambda_full_observation_reconstructs() {
        let x = random(6, 5, 2);
        let mask = DMatrix::from_element(6, 5, true);
        let p = SoftImputeParams {
            max_iters: 200,
            tol: 1e-15,
            ..SoftImputeParams::new(0.0, 3)
        };
        let model = soft_impute_masked(&x, &mask, &p, None).unwrap();
        assert!((model.reconstruct() - &x).norm() < 1e-10);
    }

    #[test]
    fn factors_are_orthonormal_and_sorted() {
        let x = random(8, 12, 4);
        let mask = DMatrix::from_fn(8, 12, |i, j| (i * 7 + j * 3) % 5 != 0);
        let model = soft_impute_masked(&x, &mask, &SoftImputeParams::new(0.3, 5), None).unwrap();
        let r = model.rank();
        assert!(r > 0);
        assert!((model.u.transpose() * &model.u - DMatrix::identity(r, r)).norm() < 1e-8);
        assert!((model.v.transpose() * &model.v - DMatrix::identity(r, r)).norm() < 1e-8);
        assert!(model.d.iter().zip(model.d.iter().skip(1)).all(|(a, b)| a >= b));
        assert!(model.d.iter().all(|&x| x > 0.0));
        for w in model.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
    }

    #[test]
    fn rank_cap_is_respected() {
        let x = random(10, 10, 6);
        let mask = DMatrix::from_element(10, 10, true);
        let p = SoftImputeParams {
            max_rank: Some(2),
            ..SoftImputeParams::new(0.01, 7)
        };
        assert!(soft_impute_masked(&x, &mask, &p, None).unwrap().rank() <= 2);
    }

    #[test]
    fn soft_threshold_kills_small_values() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        let s = soft_threshold_svd(&m, 1.5);
        assert!((s - DMatrix::from_diagonal(&DVector::from_vec(vec![1.5, 0.0]))).norm() < 1e-12);
    }
}
