use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{FitModel, RNG_ALGORITHM};
use crate::error::{arg, Error, Result};
use crate::optics::CoherenceCurve;

/// Log-parameter step of the central-difference Jacobian.
const FD_STEP: f64 = 1e-6;
const INITIAL_DAMPING: f64 = 1e-3;
const STEP_TOL: f64 = 1e-10;
const RSS_TOL: f64 = 1e-12;
const MAX_DAMPING: f64 = 1e30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Seed of the data being fitted, echoed into the result.
    pub seed: Option<u64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Vec<f64>,
    pub residual_rss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub param_stderr: Vec<f64>,
    pub rng_algorithm: String,
    pub seed: Option<u64>,
}

/// RSS after every accepted step, starting from the guess.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitTrace {
    pub accepted_rss: Vec<f64>,
}

pub fn fit(curve: &CoherenceCurve, model: &FitModel, guess: &[f64]) -> Result<FitResult> {
    fit_with(curve, model, guess, &FitOptions::default()).map(|(r, _)| r)
}

fn residuals(model: &FitModel, theta: &[f64], b: &[f64], y: &[f64]) -> DVector<f64> {
    let p: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
    DVector::from_iterator(b.len(), b.iter().zip(y).map(|(&b, &y)| model.evaluate(&p, b) - y))
}

fn jacobian(model: &FitModel, theta: &[f64], b: &[f64], y: &[f64]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(b.len(), theta.len());
    for c in 0..theta.len() {
        let mut up = theta.to_vec();
        let mut down = theta.to_vec();
        up[c] += FD_STEP;
        down[c] -= FD_STEP;
        let d = (residuals(model, &up, b, y) - residuals(model, &down, b, y)) / (2.0 * FD_STEP);
        j.set_column(c, &d);
    }
    j
}

/// Levenberg–Marquardt on log-parameters with Marquardt diagonal scaling.
pub fn fit_with(
    curve: &CoherenceCurve,
    model: &FitModel,
    guess: &[f64],
    options: &FitOptions,
) -> Result<(FitResult, FitTrace)> {
    model.check_params(guess)?;
    let (b, y) = (curve.baselines(), curve.values());
    let n_params = model.n_params();
    if b.len() < 2 * n_params {
        return arg(format!(
            "need at least {} samples for {} parameters, got {}",
            2 * n_params,
            n_params,
            b.len()
        ));
    }
    let mut theta: Vec<f64> = guess.iter().map(|p| p.ln()).collect();
    let mut r = residuals(model, &theta, b, y);
    let mut rss = r.norm_squared();
    let mut trace = FitTrace {
        accepted_rss: vec![rss],
    };
    let mut lambda = INITIAL_DAMPING;
    let mut converged = rss == 0.0;
    let mut iterations = 0;
    let mut j = jacobian(model, &theta, b, y);
    while !converged && iterations < options.max_iter {
        iterations += 1;
        let jtj = j.transpose() * &j;
        let grad = j.transpose() * &r;
        let mut lhs = jtj.clone();
        for d in 0..n_params {
            lhs[(d, d)] += lambda * jtj[(d, d)];
        }
        let step = lhs
            .clone()
            .lu()
            .solve(&(-&grad))
            .filter(|s| s.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Numerical("singular normal equations".into()))?;
        if step.amax() < STEP_TOL {
            converged = true;
            break;
        }
        let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
        let r_trial = residuals(model, &trial, b, y);
        let rss_trial = r_trial.norm_squared();
        if rss_trial < rss {
            let change = (rss - rss_trial) / rss;
            theta = trial;
            r = r_trial;
            rss = rss_trial;
            trace.accepted_rss.push(rss);
            lambda = (lambda / 10.0).max(f64::MIN_POSITIVE);
            if change < RSS_TOL || rss == 0.0 {
                converged = true;
                break;
            }
            j = jacobian(model, &theta, b, y);
        } else {
            lambda *= 10.0;
            if lambda > MAX_DAMPING {
                break;
            }
        }
    }
    let params: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
    let param_stderr = stderr(&j, &params, rss, b.len())?;
    Ok((
        FitResult {
            params,
            residual_rss: rss,
            iterations,
            converged,
            param_stderr,
            rng_algorithm: RNG_ALGORITHM.to_string(),
            seed: options.seed,
        },
        trace,
    ))
}

/// sqrt(diag(s²(J_pᵀJ_p)⁻¹)) with s² = RSS/(n − p); J_p is the Jacobian in
/// the natural parameters, J_θ/p column-wise.
fn stderr(j_theta: &DMatrix<f64>, params: &[f64], rss: f64, n: usize) -> Result<Vec<f64>> {
    let p = params.len();
    if n <= p {
        return Ok(vec![f64::NAN; p]);
    }
    let mut jp = j_theta.clone();
    for (c, v) in params.iter().enumerate() {
        jp.column_mut(c).unscale_mut(*v);
    }
    let cov = (jp.transpose() * &jp)
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular covariance".into()))?;
    let s2 = rss / (n - p) as f64;
    Ok((0..p).map(|d| (s2 * cov[(d, d)]).max(0.0).sqrt()).collect())
}
