use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum Dispersion {
    /// ω = |k|
    #[default]
    Massless,
    /// ω = √(k² + m²)
    Massive { m: f64 },
}

impl Dispersion {
    pub fn omega(&self, k: f64) -> f64 {
        match *self {
            Self::Massless => k.abs(),
            Self::Massive { m } => k.hypot(m),
        }
    }
}

/// Discrete momentum modes shared by both pion species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    momenta: Vec<f64>,
    dispersion: Dispersion,
}

impl ModeGrid {
    pub fn new(momenta: Vec<f64>, dispersion: Dispersion) -> Result<Self> {
        if momenta.is_empty() {
            return arg("mode grid needs at least one momentum");
        }
        if momenta.iter().any(|k| !k.is_finite()) || momenta.windows(2).any(|w| w[1] <= w[0]) {
            return arg("momenta must be finite and strictly increasing");
        }
        if let Dispersion::Massive { m } = dispersion {
            if !(m.is_finite() && m >= 0.0) {
                return arg(format!("mass must be nonnegative and finite, got {m}"));
            }
        }
        Ok(Self { momenta, dispersion })
    }

    /// Momenta spacing·1, spacing·2, …, spacing·n.
    pub fn uniform(n: usize, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return arg(format!("mode spacing must be positive, got {spacing}"));
        }
        Self::new((1..=n).map(|i| spacing * i as f64).collect(), Dispersion::Massless)
    }

    pub fn with_dispersion(mut self, dispersion: Dispersion) -> Result<Self> {
        self.dispersion = dispersion;
        Self::new(self.momenta, self.dispersion)
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn momentum(&self, mode: usize) -> f64 {
        self.momenta[mode]
    }

    pub fn omega(&self, mode: usize) -> f64 {
        self.dispersion.omega(self.momenta[mode])
    }

    pub fn dispersion(&self) -> Dispersion {
        self.dispersion
    }

    /// Common spacing if the momenta are equally spaced.
    pub fn spacing(&self) -> Option<f64> {
        match self.momenta.as_slice() {
            [] => None,
            [_] => Some(self.momenta[0].abs()).filter(|h| *h > 0.0),
            [a, b, ..] => {
                let h = b - a;
                let ok = self
                    .momenta
                    .windows(2)
                    .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.max(1.0));
                ok.then_some(h)
            }
        }
    }
}

/// Equality of momentum sums up to accumulated round-off of grid arithmetic.
pub(crate) fn momenta_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}
