//! Ready-made two-pair configurations.

use serde::{Deserialize, Serialize};

use super::correlation::Detector;
use super::field::Acceptance;
use super::grid::ModeGrid;
use super::source::{product_pair_state, PairSourceSpec, Splitting};
use super::space::{FockSpace, FockState, DEFAULT_N_MAX};
use crate::error::{arg, Result};
use crate::linalg::C64;

/// Sources, the resulting two-pair state and the two detectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPairConfiguration {
    pub space: FockSpace,
    pub sources: Vec<PairSourceSpec>,
    pub state: FockState,
    pub d1: Detector,
    pub d2: Detector,
    /// Momenta (k₁, k₂, k₃, k₄) in the plane-wave labelling, where defined.
    pub momenta: Option<[f64; 4]>,
}

fn build(
    grid: ModeGrid,
    sources: Vec<PairSourceSpec>,
    d1: Detector,
    d2: Detector,
    momenta: Option<[f64; 4]>,
) -> Result<TwoPairConfiguration> {
    let mut rho: Vec<f64> = sources.iter().map(|s| s.q_rho).collect();
    rho.sort_by(f64::total_cmp);
    rho.dedup_by(|a, b| super::grid::momenta_match(*a, *b));
    let space = FockSpace::new(grid, rho, DEFAULT_N_MAX)?;
    let state = product_pair_state(&sources, &space)?;
    Ok(TwoPairConfiguration {
        space,
        sources,
        state,
        d1,
        d2,
        momenta,
    })
}

fn uniform_grid(n_modes: usize, spacing: f64) -> Result<ModeGrid> {
    if n_modes < 4 {
        return arg(format!("two-pair configurations need at least 4 modes, got {n_modes}"));
    }
    ModeGrid::uniform(n_modes, spacing)
}

fn pair(grid: &ModeGrid, splits: &[(usize, usize)], position: f64) -> Result<PairSourceSpec> {
    let (u, v) = splits[0];
    let q = grid.momentum(u) + grid.momentum(v);
    let w = C64::new(1.0, 0.0);
    PairSourceSpec::new(
        q,
        grid.omega(u) + grid.omega(v),
        position,
        splits.iter().map(|&(a, b)| Splitting::new(a, b, w)).collect(),
    )
}

/// Two charge-entangled pairs: each ρ yields (π⁺u, π⁻v) or (π⁺v, π⁻u) with
/// equal amplitude. Detector 1 sees the low modes u₁, u₂, detector 2 the
/// high modes v₁, v₂.
pub fn fully_entangled_configuration(n_modes: usize, spacing: f64) -> Result<TwoPairConfiguration> {
    let grid = uniform_grid(n_modes, spacing)?;
    let (u1, v1, u2, v2) = (0, n_modes - 1, 1, n_modes - 2);
    let a = pair(&grid, &[(u1, v1), (v1, u1)], 0.0)?;
    let b = pair(&grid, &[(u2, v2), (v2, u2)], 0.0)?;
    build(
        grid,
        vec![a, b],
        Detector::with_acceptance(0.0, Acceptance::modes([u1, u2])),
        Detector::with_acceptance(0.0, Acceptance::modes([v1, v2])),
        None,
    )
}

/// Same modes and detectors as the entangled case, but each ρ always sends
/// its π⁺ towards detector 1.
pub fn product_charge_configuration(n_modes: usize, spacing: f64) -> Result<TwoPairConfiguration> {
    let grid = uniform_grid(n_modes, spacing)?;
    let (u1, v1, u2, v2) = (0, n_modes - 1, 1, n_modes - 2);
    let a = pair(&grid, &[(u1, v1)], 0.0)?;
    let b = pair(&grid, &[(u2, v2)], 0.0)?;
    build(
        grid,
        vec![a, b],
        Detector::with_acceptance(0.0, Acceptance::modes([u1, u2])),
        Detector::with_acceptance(0.0, Acceptance::modes([v1, v2])),
        None,
    )
}

/// Two sources a distance `separation` apart, each emitting a single
/// splitting: source a gives π⁺(k₁) π⁻(k₃), source b π⁺(k₂) π⁻(k₄), with
/// k = (h, 2h, 4h, 3h) so that k₁+k₃ = k₂+k₄. Detector 1 accepts k₁, k₃, k₄
/// and detector 2 accepts k₂, k₃, k₄, so each detector records its own π⁺
/// and either π⁻.
pub fn minimal_two_source_configuration(
    n_modes: usize,
    spacing: f64,
    separation: f64,
) -> Result<TwoPairConfiguration> {
    let grid = uniform_grid(n_modes, spacing)?;
    let (k1, k2, k4, k3) = (0, 1, 2, 3);
    let a = pair(&grid, &[(k1, k3)], 0.0)?;
    let b = pair(&grid, &[(k2, k4)], separation)?;
    let momenta = [k1, k2, k3, k4].map(|m| grid.momentum(m));
    build(
        grid,
        vec![a, b],
        Detector::with_acceptance(0.0, Acceptance::modes([k1, k3, k4])),
        Detector::with_acceptance(0.0, Acceptance::modes([k2, k3, k4])),
        Some(momenta),
    )
}

/// Two identical pairs from one source in a single splitting, seen by
/// detectors that accept every mode.
pub fn single_source_configuration(n_modes: usize, spacing: f64) -> Result<TwoPairConfiguration> {
    let grid = uniform_grid(n_modes, spacing)?;
    let a = pair(&grid, &[(0, n_modes - 1)], 0.0)?;
    build(
        grid,
        vec![a.clone(), a],
        Detector::new(0.0),
        Detector::new(0.0),
        None,
    )
}
