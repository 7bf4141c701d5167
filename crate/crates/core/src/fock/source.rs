use log::warn;
use serde::{Deserialize, Serialize};

use super::grid::{momenta_match, ModeGrid};
use super::space::{FockSpace, FockState, Species};
use crate::error::{arg, Result};
use crate::linalg::C64;

/// |c₁| above which first-order perturbation theory is no longer trusted.
pub const PERTURBATIVE_LIMIT: f64 = 0.5;

/// One π⁺/π⁻ momentum split of a ρ, by mode index, with its amplitude f.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Splitting {
    pub plus: usize,
    pub minus: usize,
    pub weight: C64,
}

impl Splitting {
    pub fn new(plus: usize, minus: usize, weight: C64) -> Self {
        Self { plus, minus, weight }
    }
}

/// A ρ source: its momentum, energy, location and the pair amplitude f.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSourceSpec {
    pub q_rho: f64,
    pub omega_rho: f64,
    pub position: f64,
    splittings: Vec<Splitting>,
}

impl PairSourceSpec {
    /// Weights are rescaled so that Σ|f|² = 1.
    pub fn new(q_rho: f64, omega_rho: f64, position: f64, splittings: Vec<Splitting>) -> Result<Self> {
        if ![q_rho, omega_rho, position].iter().all(|v| v.is_finite()) {
            return arg("source parameters must be finite");
        }
        if splittings.iter().any(|s| !(s.weight.re.is_finite() && s.weight.im.is_finite())) {
            return arg("splitting weights must be finite");
        }
        let norm: f64 = splittings.iter().map(|s| s.weight.norm_sqr()).sum::<f64>().sqrt();
        if norm <= f64::MIN_POSITIVE {
            return arg("a source needs at least one splitting with nonzero weight");
        }
        let splittings = splittings
            .into_iter()
            .map(|s| Splitting { weight: s.weight / norm, ..s })
            .collect();
        Ok(Self {
            q_rho,
            omega_rho,
            position,
            splittings,
        })
    }

    /// Equal weights over every on-grid split of `q_rho`.
    ///
    /// Splits that also conserve energy are kept alone when the grid admits
    /// any; otherwise all momentum-conserving splits are used.
    pub fn uniform(grid: &ModeGrid, q_rho: f64, omega_rho: f64, position: f64) -> Result<Self> {
        let n = grid.len();
        let mut candidates = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if momenta_match(grid.momentum(i) + grid.momentum(j), q_rho) {
                    candidates.push((i, j));
                }
            }
        }
        if candidates.is_empty() {
            return arg(format!("no pair of grid momenta sums to q_rho = {q_rho}"));
        }
        let on_shell: Vec<_> = candidates
            .iter()
            .copied()
            .filter(|&(i, j)| momenta_match(grid.omega(i) + grid.omega(j), omega_rho))
            .collect();
        let chosen = if on_shell.is_empty() { candidates } else { on_shell };
        let w = C64::new(1.0, 0.0);
        Self::new(
            q_rho,
            omega_rho,
            position,
            chosen.into_iter().map(|(i, j)| Splitting::new(i, j, w)).collect(),
        )
    }

    pub fn splittings(&self) -> &[Splitting] {
        &self.splittings
    }

    pub fn validate(&self, grid: &ModeGrid) -> Result<()> {
        for s in &self.splittings {
            if s.plus >= grid.len() || s.minus >= grid.len() {
                return arg(format!(
                    "splitting ({}, {}) refers to a mode outside the {}-mode grid",
                    s.plus,
                    s.minus,
                    grid.len()
                ));
            }
            let sum = grid.momentum(s.plus) + grid.momentum(s.minus);
            if !momenta_match(sum, self.q_rho) {
                return arg(format!(
                    "splitting ({}, {}) carries momentum {sum}, not q_rho = {}",
                    s.plus, s.minus, self.q_rho
                ));
            }
        }
        Ok(())
    }

    /// Σ f a†b† applied to `state`, with the source-position phase.
    pub fn apply_pair_creation(&self, space: &FockSpace, state: &FockState) -> Result<FockState> {
        self.validate(space.grid())?;
        let phase = C64::from_polar(1.0, self.q_rho * self.position);
        let mut out = FockState::zero();
        for s in &self.splittings {
            let created = state
                .create(space, Species::PiPlus, s.plus)
                .create(space, Species::PiMinus, s.minus);
            out.add_scaled(&created, s.weight * phase);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianConfig {
    pub g: f64,
    pub dt: f64,
}

impl HamiltonianConfig {
    pub fn new(g: f64, dt: f64) -> Result<Self> {
        if !g.is_finite() {
            return arg(format!("coupling must be finite, got {g}"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return arg(format!("time step must be positive, got {dt}"));
        }
        Ok(Self { g, dt })
    }
}

/// Normalised Σ f a†b†|0⟩ for one source.
pub fn pair_state(spec: &PairSourceSpec, space: &FockSpace) -> Result<FockState> {
    product_pair_state(std::slice::from_ref(spec), space)
}

/// Normalised product of the pair-creation polynomials of every source on the vacuum.
pub fn product_pair_state(specs: &[PairSourceSpec], space: &FockSpace) -> Result<FockState> {
    if specs.is_empty() {
        return arg("at least one source is required");
    }
    if 2 * specs.len() > space.n_max() {
        return arg(format!(
            "{} pairs need a truncation cap of at least {}, have {}",
            specs.len(),
            2 * specs.len(),
            space.n_max()
        ));
    }
    let mut state = FockState::vacuum(space);
    for spec in specs {
        state = spec.apply_pair_creation(space, &state)?;
    }
    state.normalize()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderState {
    pub state: FockState,
    pub c0: C64,
    pub c1: C64,
    /// False when |c₁| exceeds the perturbative limit.
    pub perturbative: bool,
}

/// One step (1 − iH dt) from a single ρ, keeping only the pair-creation term.
///
/// With H = −g∫ψ†ψφ the pair amplitude is +i g dt κ, κ being the norm of the
/// unnormalised pair state; the result is then renormalised.
pub fn first_order_state(
    config: &HamiltonianConfig,
    spec: &PairSourceSpec,
    space: &FockSpace,
) -> Result<FirstOrderState> {
    let rho = space.rho_mode(spec.q_rho).ok_or_else(|| {
        crate::Error::Argument(format!("no ρ mode at q_rho = {}", spec.q_rho))
    })?;
    if space.n_max() < 2 {
        return arg("truncation cap below 2 cannot hold a pion pair");
    }
    let vacuum = FockState::vacuum(space);
    let initial = vacuum.create(space, Species::Rho, rho);
    let pairs = spec.apply_pair_creation(space, &vacuum)?;
    let kappa = pairs.norm_sqr().sqrt();
    let x = config.g * config.dt * kappa;
    let c0 = C64::new(1.0 / (1.0 + x * x).sqrt(), 0.0);
    let c1 = C64::new(0.0, x) * c0;
    let mut state = initial.scale(c0);
    if x != 0.0 {
        state.add_scaled(&pairs, c1 / kappa);
    }
    let perturbative = c1.norm() <= PERTURBATIVE_LIMIT;
    if !perturbative {
        warn!(
            "|c1| = {:.3} exceeds {PERTURBATIVE_LIMIT}; first-order result is outside its regime",
            c1.norm()
        );
    }
    Ok(FirstOrderState {
        state,
        c0,
        c1,
        perturbative,
    })
}
