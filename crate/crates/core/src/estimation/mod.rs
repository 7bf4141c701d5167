//! Recovering source geometry from sampled coherence curves.

mod guess;
mod lm;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::optics::{coherence_double_source, coherence_single_tophat, CoherenceCurve, OpticalContext};

pub use guess::{initial_guess, initial_guess_with, InitialGuess};
pub use lm::{fit, fit_with, FitOptions, FitResult, FitTrace};

/// Name of the generator behind every seeded draw in this crate.
pub const RNG_ALGORITHM: &str = "ChaCha8";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// C = sinc²(kαb/2); parameters [α].
    SingleTopHat,
    /// C = sinc²(kαb)·cos²(kβb); parameters [α, β].
    DoubleSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    pub kind: ModelKind,
    pub ctx: OpticalContext,
}

impl FitModel {
    pub fn single_top_hat(ctx: OpticalContext) -> Self {
        Self {
            kind: ModelKind::SingleTopHat,
            ctx,
        }
    }

    pub fn double_source(ctx: OpticalContext) -> Self {
        Self {
            kind: ModelKind::DoubleSource,
            ctx,
        }
    }

    pub fn n_params(&self) -> usize {
        match self.kind {
            ModelKind::SingleTopHat => 1,
            ModelKind::DoubleSource => 2,
        }
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return arg(format!(
                "model takes {} parameters, got {}",
                self.n_params(),
                params.len()
            ));
        }
        if params.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return arg(format!("parameters must be positive and finite, got {params:?}"));
        }
        Ok(())
    }

    /// Forward model; `params` must already be valid.
    pub fn evaluate(&self, params: &[f64], b: f64) -> f64 {
        match self.kind {
            ModelKind::SingleTopHat => coherence_single_tophat(&self.ctx, params[0], b),
            ModelKind::DoubleSource => coherence_double_source(&self.ctx, params[0], params[1], b),
        }
    }

    pub(crate) fn rss(&self, params: &[f64], baselines: &[f64], values: &[f64]) -> f64 {
        baselines
            .iter()
            .zip(values)
            .map(|(&b, &y)| (self.evaluate(params, b) - y).powi(2))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return arg(format!("noise sigma must be nonnegative, got {sigma}"));
        }
        Ok(Self { sigma, seed })
    }

    pub fn noiseless() -> Self {
        Self { sigma: 0.0, seed: 0 }
    }
}

/// Forward model plus additive Gaussian noise, clamped to [0, 1].
pub fn synthesize_curve(
    model: &FitModel,
    params: &[f64],
    baselines: &[f64],
    noise: &NoiseSpec,
) -> Result<CoherenceCurve> {
    model.check_params(params)?;
    let noise = NoiseSpec::new(noise.sigma, noise.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let normal = Normal::new(0.0, noise.sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| crate::Error::Argument(e.to_string()))?;
    let values = baselines
        .iter()
        .map(|&b| {
            let clean = model.evaluate(params, b);
            let noisy = if noise.sigma > 0.0 {
                clean + normal.sample(&mut rng)
            } else {
                clean
            };
            noisy.clamp(0.0, 1.0)
        })
        .collect();
    CoherenceCurve::new(baselines.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> OpticalContext {
        OpticalContext::new(1.0e4).unwrap()
    }

    fn grid(n: usize, max: f64) -> Vec<f64> {
        (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn noiseless_matches_forward_model() {
        let m = FitModel::single_top_hat(ctx());
        let bs = grid(50, 2.0);
        let c = synthesize_curve(&m, &[1e-3], &bs, &NoiseSpec::noiseless()).unwrap();
        for (b, v) in bs.iter().zip(c.values()) {
            assert_eq!(*v, coherence_single_tophat(&m.ctx, 1e-3, *b));
        }
    }

    #[test]
    fn same_seed_same_curve() {
        let m = FitModel::double_source(ctx());
        let bs = grid(80, 2.0);
        let n = NoiseSpec::new(0.02, 99).unwrap();
        let a = synthesize_curve(&m, &[1e-3, 3e-4], &bs, &n).unwrap();
        let b = synthesize_curve(&m, &[1e-3, 3e-4], &bs, &n).unwrap();
        assert_eq!(a, b);
        let c = synthesize_curve(&m, &[1e-3, 3e-4], &bs, &NoiseSpec::new(0.02, 100).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_level_is_sigma() {
        // tiny α keeps C near 0.5 away from the clamp
        let m = FitModel::double_source(OpticalContext::new(1.0).unwrap());
        let bs: Vec<f64> = (0..10_000).map(|i| 1.0 + i as f64 * 1e-12).collect();
        let beta = std::f64::consts::FRAC_PI_4;
        let params = [1e-9, beta];
        let clean = synthesize_curve(&m, &params, &bs, &NoiseSpec::noiseless()).unwrap();
        let noisy = synthesize_curve(&m, &params, &bs, &NoiseSpec::new(0.01, 5).unwrap()).unwrap();
        let d: Vec<f64> = noisy.values().iter().zip(clean.values()).map(|(a, b)| a - b).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
        assert!((var.sqrt() - 0.01).abs() < 0.001);
    }

    #[test]
    fn parameter_count_checked() {
        let m = FitModel::double_source(ctx());
        assert!(synthesize_curve(&m, &[1e-3], &[0.0, 1.0], &NoiseSpec::noiseless()).is_err());
        assert!(synthesize_curve(&m, &[1e-3, -1.0], &[0.0, 1.0], &NoiseSpec::noiseless()).is_err());
        assert!(NoiseSpec::new(-0.1, 0).is_err());
    }
}
