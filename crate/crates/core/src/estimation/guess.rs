use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{FitModel, ModelKind};
use crate::error::{arg, Result};
use crate::optics::CoherenceCurve;

/// Fewest samples from which a zero can be located.
pub const MIN_GUESS_SAMPLES: usize = 8;
/// The smoothed curve must dip below this before a minimum counts as a zero.
const ZERO_THRESHOLD: f64 = 0.25;
/// Points per decade in the one-dimensional envelope search.
const SEARCH_POINTS: usize = 400;
const SEARCH_DECADES: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialGuess {
    pub params: Vec<f64>,
    /// True when no zero was found and `params` is the default guess.
    pub fallback: bool,
}

/// Initial guess with a default that puts the first zero at the last baseline.
pub fn initial_guess(curve: &CoherenceCurve, model: &FitModel) -> Result<InitialGuess> {
    let b_max = *curve.baselines().last().expect("curves are never empty");
    let k = model.ctx.k();
    let default = if b_max > 0.0 {
        match model.kind {
            ModelKind::SingleTopHat => vec![2.0 * PI / (k * b_max)],
            ModelKind::DoubleSource => vec![PI / (k * b_max), PI / (2.0 * k * b_max)],
        }
    } else {
        vec![1.0; model.n_params()]
    };
    initial_guess_with(curve, model, &default)
}

/// Locates the first zero of the curve and converts it to parameters.
///
/// For the two-source model the first zero belongs either to the cosine or
/// to the sinc envelope. Each reading fixes one parameter; the other comes
/// from a log-spaced search, and the reading with the smaller residual wins.
pub fn initial_guess_with(curve: &CoherenceCurve, model: &FitModel, default: &[f64]) -> Result<InitialGuess> {
    model.check_params(default)?;
    if curve.len() < MIN_GUESS_SAMPLES {
        return arg(format!(
            "need at least {MIN_GUESS_SAMPLES} samples to locate a zero, got {}",
            curve.len()
        ));
    }
    let Some(b0) = first_zero(curve.baselines(), curve.values()) else {
        return Ok(InitialGuess {
            params: default.to_vec(),
            fallback: true,
        });
    };
    let k = model.ctx.k();
    let params = match model.kind {
        ModelKind::SingleTopHat => vec![2.0 * PI / (k * b0)],
        ModelKind::DoubleSource => {
            let beta_if_cos = PI / (2.0 * k * b0);
            let alpha_if_sinc = PI / (k * b0);
            let (b, y) = (curve.baselines(), curve.values());
            let a = search(|alpha| model.rss(&[alpha, beta_if_cos], b, y), alpha_if_sinc);
            let c = search(|beta| model.rss(&[alpha_if_sinc, beta], b, y), beta_if_cos);
            let rss_a = model.rss(&[a, beta_if_cos], b, y);
            let rss_c = model.rss(&[alpha_if_sinc, c], b, y);
            if rss_a <= rss_c {
                vec![a, beta_if_cos]
            } else {
                vec![alpha_if_sinc, c]
            }
        }
    };
    Ok(InitialGuess {
        params,
        fallback: false,
    })
}

/// Minimises `f` over a log grid spanning ±SEARCH_DECADES/2 around `centre`.
fn search(f: impl Fn(f64) -> f64, centre: f64) -> f64 {
    let n = (SEARCH_POINTS as f64 * SEARCH_DECADES) as usize;
    let lo = centre.log10() - SEARCH_DECADES / 2.0;
    let mut best = (f64::INFINITY, centre);
    for i in 0..=n {
        let p = 10f64.powf(lo + SEARCH_DECADES * i as f64 / n as f64);
        let v = f(p);
        if v < best.0 {
            best = (v, p);
        }
    }
    best.1
}

/// Baseline of the first zero: the first local minimum of the smoothed
/// curve after it has fallen below the threshold, refined by a parabola.
fn first_zero(b: &[f64], y: &[f64]) -> Option<f64> {
    let n = y.len();
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(n - 1);
            y[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let start = smooth.iter().position(|&v| v < ZERO_THRESHOLD)?;
    let mut j = start;
    while j + 1 < n && smooth[j + 1] <= smooth[j] {
        j += 1;
    }
    if j + 1 >= n || j == 0 {
        return None;
    }
    let (x0, x1, x2) = (b[j - 1], b[j], b[j + 1]);
    let (y0, y1, y2) = (smooth[j - 1], smooth[j], smooth[j + 1]);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    let bb = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if a > 0.0 {
        let vertex = -bb / (2.0 * a);
        if vertex > x0 && vertex < x2 {
            return Some(vertex);
        }
    }
    Some(x1)
}
