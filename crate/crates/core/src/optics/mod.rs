//! Plane-wave interference and source coherence.
//!
//! Angles are radians, baselines and positions metres, wavenumbers rad/m.
//! No unit conversion happens anywhere in this module.

mod curve;
mod vcz;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

pub use curve::{read_columns, write_columns, CoherenceCurve};
pub use vcz::{
    coherence_at, coherence_at_level, vcz_numeric_coherence, vcz_numeric_coherence_with, CoherenceSample,
    QuadratureConfig, SourceProfile,
};

/// Below this argument sinc is evaluated from its Taylor series.
const SINC_SERIES_CUTOFF: f64 = 1e-6;
/// Tolerance on the pair-momentum constraint of the four-path amplitude.
pub const MOMENTUM_CONSTRAINT_TOL: f64 = 1e-9;

/// sin(u)/u with the removable singularity filled in.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < SINC_SERIES_CUTOFF {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalContext {
    k: f64,
}

impl OpticalContext {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return arg(format!("wavenumber must be positive and finite, got {k}"));
        }
        Ok(Self { k })
    }

    pub fn from_wavelength(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return arg(format!("wavelength must be positive and finite, got {lambda}"));
        }
        Self::new(std::f64::consts::TAU / lambda)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        std::f64::consts::TAU / self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorPair {
    pub x1: f64,
    pub x2: f64,
}

impl DetectorPair {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn baseline(&self) -> f64 {
        (self.x2 - self.x1).abs()
    }
}

fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// e^{ik₁x₁}e^{ik₂x₂} + e^{ik₁x₂}e^{ik₂x₁}, unnormalised.
pub fn two_path_amplitude(k1: f64, k2: f64, det: &DetectorPair) -> Complex64 {
    phase(k1 * det.x1 + k2 * det.x2) + phase(k1 * det.x2 + k2 * det.x1)
}

/// Amplitude for each detector to register one particle from each pair.
///
/// Pair one carries momenta (k₁, k₃), pair two (k₂, k₄), so the pair sums
/// must agree. Particles k₁ and k₂ stay at x₁ and x₂ respectively; the two
/// terms exchange k₃ and k₄ between the detectors.
pub fn four_path_amplitude(k: [f64; 4], det: &DetectorPair) -> Result<Complex64> {
    let [k1, k2, k3, k4] = k;
    if k.iter().any(|v| !v.is_finite()) {
        return arg("momenta must be finite");
    }
    let scale = k.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if ((k1 + k3) - (k2 + k4)).abs() > MOMENTUM_CONSTRAINT_TOL * scale {
        return arg(format!(
            "pair momenta violate k1+k3 = k2+k4: {} vs {}",
            k1 + k3,
            k2 + k4
        ));
    }
    let direct = phase(k1 * det.x1 + k2 * det.x2 + k3 * det.x1 + k4 * det.x2);
    let exchanged = phase(k1 * det.x1 + k4 * det.x1 + k2 * det.x2 + k3 * det.x2);
    Ok(direct + exchanged)
}

/// |A|² of the four-path amplitude divided by its value without exchange
/// interference (the sum of the two terms' squared moduli).
pub fn normalized_four_path_intensity(k: [f64; 4], det: &DetectorPair) -> Result<f64> {
    Ok(four_path_amplitude(k, det)?.norm_sqr() / 2.0)
}

/// Coherence of a uniform source of angular width `alpha`: sin²(u)/u², u = kαb/2.
pub fn coherence_single_tophat(ctx: &OpticalContext, alpha: f64, b: f64) -> f64 {
    let s = sinc(ctx.k * alpha * b / 2.0);
    s * s
}

/// sin²(kαb)/(kαb)² · cos²(kβb), as the two-source coherence is usually written.
pub fn coherence_double_source(ctx: &OpticalContext, alpha: f64, beta: f64, b: f64) -> f64 {
    let s = sinc(ctx.k * alpha * b);
    let c = (ctx.k * beta * b).cos();
    s * s * c * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn two_path_coincident_detectors() {
        let det = DetectorPair::new(0.7, 0.7);
        let a = two_path_amplitude(3.0, 5.0, &det);
        assert!((a.norm() - 2.0).abs() < 1e-14);
        assert!((a - phase(8.0 * 0.7) * 2.0).norm() < 1e-14);
    }

    #[test]
    fn two_path_dark_fringe() {
        // (k1 - k2)(x1 - x2) = π
        let det = DetectorPair::new(0.0, PI / 2.0);
        let a = two_path_amplitude(3.0, 1.0, &det);
        assert!(a.norm() < 1e-14);
    }

    #[test]
    fn two_path_intensity_is_one_plus_cos() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let k1: f64 = rng.random_range(-10.0..10.0);
            let k2: f64 = rng.random_range(-10.0..10.0);
            let det = DetectorPair::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let direct = two_path_amplitude(k1, k2, &det).norm_sqr();
            let formula = 2.0 * (1.0 + ((k1 - k2) * (det.x1 - det.x2)).cos());
            assert!((direct - formula).abs() < 1e-12);
        }
    }

    #[test]
    fn four_path_degenerate_cases() {
        let det = DetectorPair::new(0.3, 1.9);
        let a = four_path_amplitude([2.0; 4], &det).unwrap();
        assert!((a.norm() - 2.0).abs() < 1e-14);
        let same = DetectorPair::new(1.1, 1.1);
        let a = four_path_amplitude([1.0, 2.0, 4.0, 3.0], &same).unwrap();
        assert!((a.norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn four_path_matches_exchange_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let k1: f64 = rng.random_range(-5.0..5.0);
            let k2: f64 = rng.random_range(-5.0..5.0);
            let k3: f64 = rng.random_range(-5.0..5.0);
            let k4 = k1 + k3 - k2;
            let (x1, x2) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let det = DetectorPair::new(x1, x2);
            // detector 1 holds {k1, k3} or {k1, k4}
            let oracle = (Complex64::from_polar(1.0, (k1 + k3) * x1 + (k2 + k4) * x2)
                + Complex64::from_polar(1.0, (k1 + k4) * x1 + (k2 + k3) * x2))
            .norm_sqr();
            let a = four_path_amplitude([k1, k2, k3, k4], &det).unwrap();
            assert!((a.norm_sqr() - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn four_path_constraint_violation() {
        let det = DetectorPair::new(0.0, 1.0);
        assert!(four_path_amplitude([1.0, 2.0, 3.0, 5.0], &det).is_err());
    }

    #[test]
    fn single_tophat_values() {
        let ctx = OpticalContext::new(2.0).unwrap();
        let alpha = 0.5;
        assert_eq!(coherence_single_tophat(&ctx, alpha, 0.0), 1.0);
        // kαb/2 = π  →  b = 2π/(kα)
        let b0 = 2.0 * PI / (ctx.k() * alpha);
        assert!(coherence_single_tophat(&ctx, alpha, b0) < 1e-30);
        let b_half = b0 / 2.0;
        assert!((coherence_single_tophat(&ctx, alpha, b_half) - 4.0 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn double_source_values() {
        let ctx = OpticalContext::new(3.0).unwrap();
        assert_eq!(coherence_double_source(&ctx, 0.2, 0.05, 0.0), 1.0);
        let beta = 0.05;
        let b = PI / 2.0 / (ctx.k() * beta);
        for alpha in [0.01, 0.2, 1.7] {
            assert!(coherence_double_source(&ctx, alpha, beta, b) < 1e-28);
        }
        let alpha = 0.2;
        let b = PI / (ctx.k() * alpha);
        assert!(coherence_double_source(&ctx, alpha, 0.05 * 2f64.sqrt(), b) < 1e-28);
    }

    #[test]
    fn sinc_series_is_continuous() {
        let below = sinc(0.999_999e-6);
        let above = sinc(1.000_001e-6);
        assert!((below - above).abs() < 1e-15);
    }

    #[test]
    fn context_validation() {
        assert!(OpticalContext::new(0.0).is_err());
        assert!(OpticalContext::new(f64::NAN).is_err());
        let ctx = OpticalContext::from_wavelength(5e-7).unwrap();
        assert!((ctx.lambda() * ctx.k() - 2.0 * PI).abs() <= 1e-12);
    }
}
