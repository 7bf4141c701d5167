use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CoherenceCurve, OpticalContext};
use crate::error::{arg, Error, Result};

/// Angular intensity profile of an incoherent 1-D source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SourceProfile {
    /// Uniform over [−α/2, α/2].
    TopHat { alpha: f64 },
    /// Two point sources at ±α/2.
    DeltaPair { alpha: f64 },
    /// Two uniform sources of the given width centred at ±separation/2.
    DoubleTopHat { separation: f64, width: f64 },
    /// Piecewise-linear density through (angle, weight) nodes.
    Sampled { angles: Vec<f64>, weights: Vec<f64> },
}

fn check_angle(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        arg(format!("{name} must be positive and finite, got {v}"))
    }
}

impl SourceProfile {
    pub fn top_hat(alpha: f64) -> Result<Self> {
        check_angle("alpha", alpha)?;
        Ok(Self::TopHat { alpha })
    }

    pub fn delta_pair(alpha: f64) -> Result<Self> {
        check_angle("alpha", alpha)?;
        Ok(Self::DeltaPair { alpha })
    }

    pub fn double_top_hat(separation: f64, width: f64) -> Result<Self> {
        check_angle("separation", separation)?;
        check_angle("width", width)?;
        Ok(Self::DoubleTopHat { separation, width })
    }

    /// Weights are rescaled to sum to one.
    pub fn sampled(angles: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if angles.len() < 3 {
            return arg(format!("sampled profile needs at least 3 points, got {}", angles.len()));
        }
        if angles.len() != weights.len() {
            return arg("angles and weights differ in length");
        }
        if angles.iter().any(|a| !a.is_finite()) || angles.windows(2).any(|w| w[1] <= w[0]) {
            return arg("sampled angles must be finite and strictly increasing");
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return arg("sampled weights must be finite and nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return arg("sampled weights sum to zero");
        }
        let weights = weights.iter().map(|w| w / total).collect();
        Ok(Self::Sampled { angles, weights })
    }

    /// Re-validates a profile that may have been built directly or deserialised.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::TopHat { alpha } | Self::DeltaPair { alpha } => check_angle("alpha", *alpha),
            Self::DoubleTopHat { separation, width } => {
                check_angle("separation", *separation)?;
                check_angle("width", *width)
            }
            Self::Sampled { angles, weights } => {
                Self::sampled(angles.clone(), weights.clone()).map(|_| ())
            }
        }
    }

    /// Every angle multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        check_angle("scale factor", c)?;
        Ok(match self {
            Self::TopHat { alpha } => Self::TopHat { alpha: alpha * c },
            Self::DeltaPair { alpha } => Self::DeltaPair { alpha: alpha * c },
            Self::DoubleTopHat { separation, width } => Self::DoubleTopHat {
                separation: separation * c,
                width: width * c,
            },
            Self::Sampled { angles, weights } => Self::Sampled {
                angles: angles.iter().map(|a| a * c).collect(),
                weights: weights.clone(),
            },
        })
    }

    /// Smooth pieces of the density: (lo, hi, density at lo, density at hi).
    fn segments(&self) -> Vec<(f64, f64, f64, f64)> {
        match self {
            Self::TopHat { alpha } => vec![(-alpha / 2.0, alpha / 2.0, 1.0, 1.0)],
            Self::DeltaPair { .. } => Vec::new(),
            Self::DoubleTopHat { separation, width } => {
                let (s, w) = (separation / 2.0, width / 2.0);
                vec![(-s - w, -s + w, 1.0, 1.0), (s - w, s + w, 1.0, 1.0)]
            }
            Self::Sampled { angles, weights } => angles
                .windows(2)
                .zip(weights.windows(2))
                .map(|(a, w)| (a[0], a[1], w[0], w[1]))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Grid points across the whole profile at the coarsest level.
    pub start_points: usize,
    /// Largest accepted change in C between successive doublings.
    pub tolerance: f64,
    pub max_doublings: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            start_points: 513,
            tolerance: 1e-8,
            max_doublings: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSample {
    pub value: f64,
    /// Doublings past the coarsest grid at which the value was accepted.
    pub level: u32,
}

/// Simpson intervals for each segment at level 0; always even and at least 2.
fn base_intervals(segments: &[(f64, f64, f64, f64)], start_points: usize) -> Vec<usize> {
    let total: f64 = segments.iter().map(|s| s.1 - s.0).sum();
    let budget = start_points.saturating_sub(1).max(2) as f64;
    segments
        .iter()
        .map(|s| {
            let n = (budget * (s.1 - s.0) / total).round() as usize;
            (n + n % 2).max(2)
        })
        .collect()
}

/// Below this |ωh| the panel moments come from their Taylor series.
const MOMENT_SERIES_CUTOFF: f64 = 0.5;

/// ∫_{−1}^{1} v^j e^{iθv} dv for j = 0, 1, 2.
fn panel_moments(theta: f64) -> [Complex64; 3] {
    if theta.abs() < MOMENT_SERIES_CUTOFF {
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        let t2 = theta * theta;
        // term_n = (−1)^n θ^{2n}/(2n)!
        let mut term = 1.0;
        for n in 0..10 {
            let k = (2 * n) as f64;
            m0 += term / (k + 1.0);
            m2 += term / (k + 3.0);
            m1 += term * theta / ((k + 1.0) * (k + 3.0));
            term *= -t2 / ((k + 1.0) * (k + 2.0));
        }
        [
            Complex64::new(2.0 * m0, 0.0),
            Complex64::new(0.0, 2.0 * m1),
            Complex64::new(2.0 * m2, 0.0),
        ]
    } else {
        let (s, c) = theta.sin_cos();
        let t2 = theta * theta;
        [
            Complex64::new(2.0 * s / theta, 0.0),
            Complex64::new(0.0, 2.0 * (s - theta * c) / t2),
            Complex64::new(2.0 * ((t2 - 2.0) * s + 2.0 * theta * c) / (t2 * theta), 0.0),
        ]
    }
}

/// Returns (∫ I e^{iωθ} dθ, ∫ I dθ) on the given grid.
///
/// Composite Simpson panels with Filon weights: the density is interpolated
/// quadratically on each panel as in Simpson's rule, and the product with
/// e^{iωθ} is integrated exactly. For ωh → 0 the weights become h/3·(1, 4, 1).
fn simpson(segments: &[(f64, f64, f64, f64)], intervals: &[usize], omega: f64) -> (Complex64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut norm = 0.0;
    for (&(lo, hi, ilo, ihi), &m) in segments.iter().zip(intervals) {
        let h = (hi - lo) / m as f64;
        let [m0, m1, m2] = panel_moments(omega * h);
        // weights of f(−h), f(0), f(+h) on a unit-half-width panel
        let w_minus = (m2 - m1) * 0.5;
        let w_mid = m0 - m2;
        let w_plus = (m2 + m1) * 0.5;
        let density = |j: usize| ilo + (ihi - ilo) * (j as f64 / m as f64);
        let mut seg = Complex64::new(0.0, 0.0);
        let mut seg_norm = 0.0;
        for p in 0..m / 2 {
            let (j0, j1, j2) = (2 * p, 2 * p + 1, 2 * p + 2);
            let (f0, f1, f2) = (density(j0), density(j1), density(j2));
            let centre = lo + (hi - lo) * (j1 as f64 / m as f64);
            seg += Complex64::from_polar(1.0, omega * centre) * (w_minus * f0 + w_mid * f1 + w_plus * f2);
            seg_norm += f0 + 4.0 * f1 + f2;
        }
        acc += seg * h;
        norm += seg_norm * h / 3.0;
    }
    (acc, norm)
}

fn level_value(
    segments: &[(f64, f64, f64, f64)],
    base: &[usize],
    level: u32,
    omega: f64,
) -> Result<f64> {
    let factor = 1usize
        .checked_shl(level)
        .ok_or_else(|| Error::Numerical(format!("quadrature level {level} too deep")))?;
    let intervals: Vec<usize> = base.iter().map(|n| n * factor).collect();
    let (s, norm) = simpson(segments, &intervals, omega);
    if !(norm > 0.0) {
        return Err(Error::Numerical("source profile has zero total intensity".into()));
    }
    Ok(s.norm_sqr() / (norm * norm))
}

fn check_baseline(b: f64) -> Result<()> {
    if b.is_finite() && b >= 0.0 {
        Ok(())
    } else {
        arg(format!("baseline must be nonnegative and finite, got {b}"))
    }
}

/// C(b) on the grid `level` doublings finer than the coarsest one.
pub fn coherence_at_level(
    profile: &SourceProfile,
    ctx: &OpticalContext,
    b: f64,
    config: &QuadratureConfig,
    level: u32,
) -> Result<f64> {
    profile.validate()?;
    check_baseline(b)?;
    if let SourceProfile::DeltaPair { alpha } = profile {
        let c = (ctx.k() * alpha * b / 2.0).cos();
        return Ok(c * c);
    }
    let segments = profile.segments();
    let base = base_intervals(&segments, config.start_points);
    level_value(&segments, &base, level, ctx.k() * b)
}

/// C(b) with automatic grid doubling.
pub fn coherence_at(
    profile: &SourceProfile,
    ctx: &OpticalContext,
    b: f64,
    config: &QuadratureConfig,
) -> Result<CoherenceSample> {
    profile.validate()?;
    check_baseline(b)?;
    if let SourceProfile::DeltaPair { alpha } = profile {
        let c = (ctx.k() * alpha * b / 2.0).cos();
        return Ok(CoherenceSample { value: c * c, level: 0 });
    }
    let segments = profile.segments();
    let base = base_intervals(&segments, config.start_points);
    let omega = ctx.k() * b;
    let mut prev = level_value(&segments, &base, 0, omega)?;
    for level in 1..=config.max_doublings {
        let cur = level_value(&segments, &base, level, omega)?;
        if (cur - prev).abs() <= config.tolerance {
            return Ok(CoherenceSample { value: cur, level });
        }
        prev = cur;
    }
    Err(Error::Numerical(format!(
        "quadrature did not converge at b = {b} after {} doublings",
        config.max_doublings
    )))
}

pub fn vcz_numeric_coherence(
    profile: &SourceProfile,
    ctx: &OpticalContext,
    baselines: &[f64],
) -> Result<CoherenceCurve> {
    vcz_numeric_coherence_with(profile, ctx, baselines, &QuadratureConfig::default())
}

pub fn vcz_numeric_coherence_with(
    profile: &SourceProfile,
    ctx: &OpticalContext,
    baselines: &[f64],
    config: &QuadratureConfig,
) -> Result<CoherenceCurve> {
    profile.validate()?;
    for &b in baselines {
        check_baseline(b)?;
    }
    let values = baselines
        .par_iter()
        .map(|&b| coherence_at(profile, ctx, b, config).map(|s| s.value))
        .collect::<Result<Vec<f64>>>()?;
    CoherenceCurve::new(baselines.to_vec(), values)
}
