use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::grid::ModeGrid;
use super::space::{FockSpace, FockState, Species};
use crate::error::{arg, Result};
use crate::linalg::{LinearOperator, C64};

/// Frequency part of a field: `Plus` annihilates, `Minus` creates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldSign {
    Plus,
    Minus,
}

/// Momentum modes a detector responds to.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Acceptance {
    #[default]
    All,
    Modes(BTreeSet<usize>),
}

impl Acceptance {
    pub fn modes(modes: impl IntoIterator<Item = usize>) -> Self {
        Self::Modes(modes.into_iter().collect())
    }

    pub fn accepts(&self, mode: usize) -> bool {
        match self {
            Self::All => true,
            Self::Modes(set) => set.contains(&mode),
        }
    }

    pub(crate) fn validate(&self, n_modes: usize) -> Result<()> {
        match self {
            Self::Modes(set) if set.iter().any(|&m| m >= n_modes) => {
                arg(format!("acceptance names a mode outside the {n_modes}-mode grid"))
            }
            _ => Ok(()),
        }
    }
}

/// A pion field component at (x, t) as a sparse sum of ladder operators.
///
/// `species` names the particle the operator acts on and `sign` whether it
/// annihilates or creates it:
///
/// | species | sign | operator            |
/// |---------|------|---------------------|
/// | π⁺      | +    | Σ a_k e^{i(kx−ωt)}  |
/// | π⁺      | −    | Σ a†_k e^{−i(kx−ωt)} |
/// | π⁻      | +    | Σ b_k e^{−i(kx−ωt)} |
/// | π⁻      | −    | Σ b†_k e^{i(kx−ωt)} |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldOperator {
    species: Species,
    sign: FieldSign,
    terms: Vec<(usize, C64)>,
}

/// Phase sign of the annihilating part for each species.
pub(crate) fn species_phase_sign(species: Species) -> f64 {
    match species {
        Species::PiMinus => -1.0,
        _ => 1.0,
    }
}

pub fn field_operator(grid: &ModeGrid, species: Species, sign: FieldSign, x: f64, t: f64) -> Result<FieldOperator> {
    field_operator_with_acceptance(grid, species, sign, x, t, &Acceptance::All)
}

/// Mode sum restricted to the accepted modes.
pub fn field_operator_with_acceptance(
    grid: &ModeGrid,
    species: Species,
    sign: FieldSign,
    x: f64,
    t: f64,
    acceptance: &Acceptance,
) -> Result<FieldOperator> {
    if species == Species::Rho {
        return arg("field operators are defined for pions only");
    }
    if !(x.is_finite() && t.is_finite()) {
        return arg("field position and time must be finite");
    }
    acceptance.validate(grid.len())?;
    let s = species_phase_sign(species) * if sign == FieldSign::Plus { 1.0 } else { -1.0 };
    let terms = (0..grid.len())
        .filter(|&m| acceptance.accepts(m))
        .map(|m| {
            let theta = grid.momentum(m) * x - grid.omega(m) * t;
            (m, C64::from_polar(1.0, s * theta))
        })
        .collect();
    Ok(FieldOperator {
        species,
        sign,
        terms,
    })
}

impl FieldOperator {
    pub fn species(&self) -> Species {
        self.species
    }

    pub fn sign(&self) -> FieldSign {
        self.sign
    }

    /// (mode, coefficient) pairs of the mode sum.
    pub fn terms(&self) -> &[(usize, C64)] {
        &self.terms
    }

    pub fn adjoint(&self) -> Self {
        Self {
            species: self.species,
            sign: match self.sign {
                FieldSign::Plus => FieldSign::Minus,
                FieldSign::Minus => FieldSign::Plus,
            },
            terms: self.terms.iter().map(|&(m, c)| (m, c.conj())).collect(),
        }
    }

    pub fn apply(&self, state: &FockState, space: &FockSpace) -> FockState {
        let mut out = FockState::zero();
        for &(mode, c) in &self.terms {
            let moved = match self.sign {
                FieldSign::Plus => state.annihilate(self.species, mode),
                FieldSign::Minus => state.create(space, self.species, mode),
            };
            out.add_scaled(&moved, c);
        }
        out
    }

    /// Dense matrix on the full truncated basis of `space`.
    pub fn matrix(&self, space: &FockSpace) -> Result<LinearOperator> {
        let basis = space.basis()?;
        let n = basis.len();
        let mut m = ndarray::Array2::<C64>::zeros((n, n));
        for (j, b) in basis.states().iter().enumerate() {
            let image = self.apply(&FockState::basis(b.clone()), space);
            for (target, a) in image.iter() {
                if let Some(i) = basis.index_of(target) {
                    m[[i, j]] += a;
                }
            }
        }
        LinearOperator::new(vec![n], m)
    }
}

/// Dense ladder operator a_k (or b_k, c_k) on the truncated basis.
pub fn annihilation_matrix(space: &FockSpace, species: Species, mode: usize) -> Result<LinearOperator> {
    if mode >= space.n_species_modes(species) {
        return arg(format!("mode {mode} out of range for {species}"));
    }
    let basis = space.basis()?;
    let n = basis.len();
    let mut m = ndarray::Array2::<C64>::zeros((n, n));
    for (j, b) in basis.states().iter().enumerate() {
        for (target, a) in FockState::basis(b.clone()).annihilate(species, mode).iter() {
            if let Some(i) = basis.index_of(target) {
                m[[i, j]] += a;
            }
        }
    }
    LinearOperator::new(vec![n], m)
}
