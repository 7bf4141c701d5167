use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::{momenta_match, ModeGrid};
use crate::error::{arg, Error, Result};
use crate::linalg::{StateVector, C64, EPS, MAX_TOTAL_DIM};

/// Default truncation: enough for two pion pairs.
pub const DEFAULT_N_MAX: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Species {
    PiPlus,
    PiMinus,
    Rho,
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PiPlus => "π⁺",
            Self::PiMinus => "π⁻",
            Self::Rho => "ρ",
        })
    }
}

/// Occupation numbers of every mode of every species.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockBasisState {
    pub occ_plus: Vec<u8>,
    pub occ_minus: Vec<u8>,
    pub occ_rho: Vec<u8>,
}

impl FockBasisState {
    pub fn vacuum(space: &FockSpace) -> Self {
        Self {
            occ_plus: vec![0; space.n_modes()],
            occ_minus: vec![0; space.n_modes()],
            occ_rho: vec![0; space.n_rho_modes()],
        }
    }

    pub fn occupations(&self, species: Species) -> &[u8] {
        match species {
            Species::PiPlus => &self.occ_plus,
            Species::PiMinus => &self.occ_minus,
            Species::Rho => &self.occ_rho,
        }
    }

    fn occupations_mut(&mut self, species: Species) -> &mut Vec<u8> {
        match species {
            Species::PiPlus => &mut self.occ_plus,
            Species::PiMinus => &mut self.occ_minus,
            Species::Rho => &mut self.occ_rho,
        }
    }

    pub fn count(&self, species: Species) -> usize {
        self.occupations(species).iter().map(|&n| n as usize).sum()
    }

    pub fn total(&self) -> usize {
        self.count(Species::PiPlus) + self.count(Species::PiMinus) + self.count(Species::Rho)
    }

    /// (n₊, n₋, n_ρ)
    pub fn sector(&self) -> (usize, usize, usize) {
        (
            self.count(Species::PiPlus),
            self.count(Species::PiMinus),
            self.count(Species::Rho),
        )
    }

    fn all_occupations(&self) -> impl Iterator<Item = u8> + '_ {
        self.occ_plus
            .iter()
            .chain(&self.occ_minus)
            .chain(&self.occ_rho)
            .copied()
    }

    fn from_flat(flat: &[u8], modes: usize) -> Self {
        Self {
            occ_plus: flat[..modes].to_vec(),
            occ_minus: flat[modes..2 * modes].to_vec(),
            occ_rho: flat[2 * modes..].to_vec(),
        }
    }
}

/// Truncated bosonic Fock space. The basis itself is only built on request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockSpace {
    grid: ModeGrid,
    rho_momenta: Vec<f64>,
    n_max: usize,
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

impl FockSpace {
    pub fn new(grid: ModeGrid, rho_momenta: Vec<f64>, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return arg("truncation cap must be at least 1");
        }
        if rho_momenta.iter().any(|q| !q.is_finite())
            || rho_momenta.windows(2).any(|w| w[1] <= w[0])
        {
            return arg("ρ momenta must be finite and strictly increasing");
        }
        Ok(Self {
            grid,
            rho_momenta,
            n_max,
        })
    }

    pub fn grid(&self) -> &ModeGrid {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.grid.len()
    }

    pub fn rho_momenta(&self) -> &[f64] {
        &self.rho_momenta
    }

    pub fn n_rho_modes(&self) -> usize {
        self.rho_momenta.len()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn with_n_max(&self, n_max: usize) -> Result<Self> {
        Self::new(self.grid.clone(), self.rho_momenta.clone(), n_max)
    }

    pub fn rho_mode(&self, q: f64) -> Option<usize> {
        self.rho_momenta.iter().position(|&r| momenta_match(r, q))
    }

    pub fn n_species_modes(&self, species: Species) -> usize {
        match species {
            Species::PiPlus | Species::PiMinus => self.n_modes(),
            Species::Rho => self.n_rho_modes(),
        }
    }

    /// Number of basis states with at most `n_max` particles.
    pub fn dimension(&self) -> u128 {
        let slots = (2 * self.n_modes() + self.n_rho_modes()) as u128;
        binomial(slots + self.n_max as u128, self.n_max as u128)
    }

    /// Full truncated basis; fails if it exceeds the global dimension cap.
    pub fn basis(&self) -> Result<FockBasis> {
        let dim = self.dimension();
        if dim > MAX_TOTAL_DIM as u128 {
            return Err(Error::Capacity(format!(
                "Fock basis of dimension {dim} exceeds {MAX_TOTAL_DIM}"
            )));
        }
        let slots = 2 * self.n_modes() + self.n_rho_modes();
        let mut states = Vec::with_capacity(dim as usize);
        let mut flat = vec![0u8; slots];
        enumerate(&mut flat, 0, self.n_max, &mut |f| {
            states.push(FockBasisState::from_flat(f, self.n_modes()))
        });
        Ok(FockBasis::from_states(states))
    }

    /// Basis of the sector with exactly the given particle numbers.
    pub fn sector_basis(&self, n_plus: usize, n_minus: usize, n_rho: usize) -> Result<FockBasis> {
        if n_plus + n_minus + n_rho > self.n_max {
            return arg("sector lies above the truncation cap");
        }
        let fixed = |modes: usize, n: usize| -> Vec<Vec<u8>> {
            let mut out = Vec::new();
            let mut occ = vec![0u8; modes];
            exact(&mut occ, 0, n, &mut |o| out.push(o.to_vec()));
            out
        };
        let plus = fixed(self.n_modes(), n_plus);
        let minus = fixed(self.n_modes(), n_minus);
        let rho = fixed(self.n_rho_modes(), n_rho);
        let dim = plus.len() * minus.len() * rho.len();
        if dim > MAX_TOTAL_DIM {
            return Err(Error::Capacity(format!(
                "sector of dimension {dim} exceeds {MAX_TOTAL_DIM}"
            )));
        }
        let mut states = Vec::with_capacity(dim);
        for p in &plus {
            for m in &minus {
                for r in &rho {
                    states.push(FockBasisState {
                        occ_plus: p.clone(),
                        occ_minus: m.clone(),
                        occ_rho: r.clone(),
                    });
                }
            }
        }
        Ok(FockBasis::from_states(states))
    }
}

/// All occupation vectors with total at most `budget`.
fn enumerate(flat: &mut [u8], pos: usize, budget: usize, emit: &mut impl FnMut(&[u8])) {
    if pos == flat.len() {
        emit(flat);
        return;
    }
    for n in 0..=budget {
        flat[pos] = n as u8;
        enumerate(flat, pos + 1, budget - n, emit);
    }
    flat[pos] = 0;
}

/// All occupation vectors with total exactly `n`.
fn exact(occ: &mut [u8], pos: usize, n: usize, emit: &mut impl FnMut(&[u8])) {
    if pos + 1 >= occ.len() {
        if let Some(last) = occ.len().checked_sub(1) {
            occ[last] = n as u8;
            emit(occ);
            occ[last] = 0;
        } else if n == 0 {
            emit(occ);
        }
        return;
    }
    for k in 0..=n {
        occ[pos] = k as u8;
        exact(occ, pos + 1, n - k, emit);
    }
    occ[pos] = 0;
}

/// An ordered list of basis states with reverse lookup.
#[derive(Debug, Clone)]
pub struct FockBasis {
    states: Vec<FockBasisState>,
    index: HashMap<FockBasisState, usize>,
}

impl FockBasis {
    fn from_states(states: Vec<FockBasisState>) -> Self {
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Self { states, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FockBasisState] {
        &self.states
    }

    pub fn index_of(&self, state: &FockBasisState) -> Option<usize> {
        self.index.get(state).copied()
    }
}

/// Sparse superposition of Fock basis states.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FockState {
    amps: BTreeMap<FockBasisState, C64>,
}

impl FockState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn vacuum(space: &FockSpace) -> Self {
        Self::basis(FockBasisState::vacuum(space))
    }

    pub fn basis(state: FockBasisState) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(state, C64::new(1.0, 0.0));
        Self { amps }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (FockBasisState, C64)>) -> Self {
        let mut out = Self::zero();
        for (b, a) in terms {
            out.add_term(b, a);
        }
        out
    }

    pub fn amplitude(&self, state: &FockBasisState) -> C64 {
        self.amps.get(state).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockBasisState, &C64)> {
        self.amps.iter()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn add_term(&mut self, state: FockBasisState, amp: C64) {
        *self.amps.entry(state).or_default() += amp;
    }

    pub fn add_scaled(&mut self, other: &Self, c: C64) {
        for (b, a) in &other.amps {
            self.add_term(b.clone(), a * c);
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            amps: self.amps.iter().map(|(b, a)| (b.clone(), a * c)).collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr().sqrt() - 1.0).abs() <= EPS
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n <= f64::MIN_POSITIVE {
            return Err(Error::Domain("cannot normalize the zero state".into()));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .filter_map(|(b, a)| other.amps.get(b).map(|o| a.conj() * o))
            .sum()
    }

    /// Largest amplitude difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let keys: BTreeSet<&FockBasisState> = self.amps.keys().chain(other.amps.keys()).collect();
        keys.into_iter()
            .map(|k| (self.amplitude(k) - other.amplitude(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Drops amplitudes with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            amps: self
                .amps
                .iter()
                .filter(|(_, a)| a.norm() > tol)
                .map(|(b, a)| (b.clone(), *a))
                .collect(),
        }
    }

    /// Particle-number sectors carrying amplitude above `tol`.
    pub fn sectors(&self, tol: f64) -> BTreeSet<(usize, usize, usize)> {
        self.amps
            .iter()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(b, _)| b.sector())
            .collect()
    }

    /// Component in the given particle-number sector (not renormalised).
    pub fn sector_component(&self, sector: (usize, usize, usize)) -> Self {
        Self {
            amps: self
                .amps
                .iter()
                .filter(|(b, _)| b.sector() == sector)
                .map(|(b, a)| (b.clone(), *a))
                .collect(),
        }
    }

    /// a†: states pushed past the truncation cap are dropped.
    pub fn create(&self, space: &FockSpace, species: Species, mode: usize) -> Self {
        let mut out = Self::zero();
        for (b, a) in &self.amps {
            if b.total() >= space.n_max() {
                continue;
            }
            let mut next = b.clone();
            let occ = &mut next.occupations_mut(species)[mode];
            let n = *occ as f64;
            *occ += 1;
            out.add_term(next, a * (n + 1.0).sqrt());
        }
        out
    }

    pub fn annihilate(&self, species: Species, mode: usize) -> Self {
        let mut out = Self::zero();
        for (b, a) in &self.amps {
            let n = b.occupations(species)[mode];
            if n == 0 {
                continue;
            }
            let mut next = b.clone();
            next.occupations_mut(species)[mode] -= 1;
            out.add_term(next, a * (n as f64).sqrt());
        }
        out
    }

    /// Dense amplitudes over `basis`; fails if the state has support outside it.
    pub fn to_state_vector(&self, basis: &FockBasis) -> Result<StateVector> {
        let mut amps = vec![C64::new(0.0, 0.0); basis.len()];
        for (b, a) in &self.amps {
            match basis.index_of(b) {
                Some(i) => amps[i] += a,
                None if a.norm() <= EPS => {}
                None => return arg("state has support outside the basis"),
            }
        }
        StateVector::new(vec![basis.len()], amps)
    }

    pub fn from_state_vector(v: &StateVector, basis: &FockBasis) -> Result<Self> {
        if v.dim() != basis.len() {
            return arg("vector and basis differ in dimension");
        }
        Ok(Self::from_terms(
            basis
                .states()
                .iter()
                .zip(v.amplitudes().iter())
                .filter(|(_, a)| a.norm() > 0.0)
                .map(|(b, a)| (b.clone(), *a)),
        ))
    }

    pub(crate) fn check_shape(&self, space: &FockSpace) -> Result<()> {
        for b in self.amps.keys() {
            if b.occ_plus.len() != space.n_modes()
                || b.occ_minus.len() != space.n_modes()
                || b.occ_rho.len() != space.n_rho_modes()
            {
                return arg("state does not belong to this Fock space");
            }
            if b.all_occupations().map(|n| n as usize).sum::<usize>() > space.n_max() {
                return arg("state exceeds the truncation cap");
            }
        }
        Ok(())
    }
}
