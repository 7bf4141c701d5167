//! Charge-qubit model of detected pion pairs.
//!
//! A π⁺ is the qubit state |0⟩ and a π⁻ is |1⟩. Two pairs (qubits 1,2 and
//! 3,4) are emitted; a [`PairingScheme`] says which qubits end up in which
//! detector. Qubit labels in this module are 1-based to match the usual
//! "(13)(24)" notation; internally subsystem `k` is label `k + 1`.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::linalg::{
    DensityOperator, Expectation, LinearOperator, StateVector, TensorProduct, C64, ONE, ZERO,
};

/// Margin by which the global purity must exceed each local purity.
pub const WITNESS_MARGIN: f64 = 1e-9;
/// Slack allowed on the lower and upper ends of a symmetric-outcome probability.
pub const PROBABILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellKind {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

/// Normalised Bell state, e.g. Ψ⁺ = (|01⟩ + |10⟩)/√2.
pub fn bell_state(kind: BellKind) -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (i, j, sign) = match kind {
        BellKind::PsiPlus => (1, 2, 1.0),
        BellKind::PsiMinus => (1, 2, -1.0),
        BellKind::PhiPlus => (0, 3, 1.0),
        BellKind::PhiMinus => (0, 3, -1.0),
    };
    let mut amps = vec![ZERO; 4];
    amps[i] = C64::new(h, 0.0);
    amps[j] = C64::new(sign * h, 0.0);
    StateVector::new(vec![2, 2], amps).expect("two-qubit Bell state")
}

/// Which two qubits each detector receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingScheme {
    pub detector_a: (usize, usize),
    pub detector_b: (usize, usize),
}

impl PairingScheme {
    pub fn new(detector_a: (usize, usize), detector_b: (usize, usize)) -> Result<Self> {
        let mut labels = [detector_a.0, detector_a.1, detector_b.0, detector_b.1];
        labels.sort_unstable();
        if labels != [1, 2, 3, 4] {
            return arg(format!(
                "pairing {detector_a:?}{detector_b:?} is not a permutation of qubits 1..4"
            ));
        }
        Ok(Self { detector_a, detector_b })
    }

    /// Qubits 1 and 3 in detector A, 2 and 4 in detector B.
    pub fn detected() -> Self {
        Self { detector_a: (1, 3), detector_b: (2, 4) }
    }

    /// Each detector receives one emitted pair intact.
    pub fn identity() -> Self {
        Self { detector_a: (1, 2), detector_b: (3, 4) }
    }

    /// Subsystem order that brings the qubits into (A₁, A₂, B₁, B₂) order.
    fn order(&self) -> [usize; 4] {
        [
            self.detector_a.0 - 1,
            self.detector_a.1 - 1,
            self.detector_b.0 - 1,
            self.detector_b.1 - 1,
        ]
    }

    fn inverse_order(&self) -> [usize; 4] {
        let mut inv = [0; 4];
        for (j, &o) in self.order().iter().enumerate() {
            inv[o] = j;
        }
        inv
    }
}

impl Default for PairingScheme {
    fn default() -> Self {
        Self::detected()
    }
}

impl fmt::Display for PairingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            self.detector_a.0, self.detector_a.1, self.detector_b.0, self.detector_b.1
        )
    }
}

impl FromStr for PairingScheme {
    type Err = Error;

    /// Parses `"13,24"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let pair = |p: &str| -> Result<(usize, usize)> {
            let digits: Vec<usize> = p
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Argument(format!("bad pairing component {p:?}")))?;
            match digits.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => arg(format!("pairing component {p:?} must name two qubits")),
            }
        };
        match parts.as_slice() {
            [a, b] => Self::new(pair(a)?, pair(b)?),
            _ => arg(format!("pairing {s:?} must look like 13,24")),
        }
    }
}

/// Coefficients of a four-qubit state in the detected-pair basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedExpansion {
    /// |00⟩_A |11⟩_B: both π⁺ in detector A.
    pub a00_b11: C64,
    /// |11⟩_A |00⟩_B: both π⁻ in detector A.
    pub a11_b00: C64,
    /// Ψ⁺_A Ψ⁺_B.
    pub psi_plus: C64,
    /// Ψ⁻_A Ψ⁻_B.
    pub psi_minus: C64,
    /// Component outside the span of the four vectors above, in the input ordering.
    pub residual: StateVector,
    pub pairing: PairingScheme,
}

impl DetectedExpansion {
    pub fn residual_norm(&self) -> f64 {
        self.residual.norm_sqr().sqrt()
    }

    pub fn coefficients(&self) -> [C64; 4] {
        [self.a00_b11, self.a11_b00, self.psi_plus, self.psi_minus]
    }

    /// Re-sums the expansion, residual included, in the original qubit order.
    pub fn resum(&self) -> Result<StateVector> {
        let basis = detected_basis(&self.pairing)?;
        let coeffs = self.coefficients();
        let mut terms: Vec<(C64, &StateVector)> =
            coeffs.iter().copied().zip(basis.iter()).collect();
        terms.push((ONE, &self.residual));
        StateVector::linear_combination(&terms)
    }
}

/// The four detected-basis vectors expressed in the original qubit ordering.
fn detected_basis(pairing: &PairingScheme) -> Result<[StateVector; 4]> {
    let inv = pairing.inverse_order();
    let dims = vec![2, 2, 2, 2];
    let psi_p = bell_state(BellKind::PsiPlus);
    let psi_m = bell_state(BellKind::PsiMinus);
    let in_ab_order = [
        StateVector::product_basis(dims.clone(), &[0, 0, 1, 1])?,
        StateVector::product_basis(dims, &[1, 1, 0, 0])?,
        psi_p.tensor(&psi_p)?,
        psi_m.tensor(&psi_m)?,
    ];
    let mut out = Vec::with_capacity(4);
    for v in &in_ab_order {
        out.push(v.permute(&inv)?);
    }
    Ok(out.try_into().expect("four vectors"))
}

fn require_four_qubits(dims: &[usize]) -> Result<()> {
    if dims != [2, 2, 2, 2] {
        return arg(format!("expected four qubits, got dims {dims:?}"));
    }
    Ok(())
}

/// Expands a normalised four-qubit state in the basis of the detected qubits.
pub fn detected_basis_expansion(
    state: &StateVector,
    pairing: &PairingScheme,
) -> Result<DetectedExpansion> {
    require_four_qubits(state.dims())?;
    if !state.is_normalized() {
        return arg(format!("state norm² {} is not 1", state.norm_sqr()));
    }
    let basis = detected_basis(pairing)?;
    let mut coeffs = [ZERO; 4];
    for (c, e) in coeffs.iter_mut().zip(&basis) {
        *c = e.inner(state)?;
    }
    let mut terms: Vec<(C64, &StateVector)> = vec![(ONE, state)];
    terms.extend(coeffs.iter().map(|c| -*c).zip(basis.iter()));
    let residual = StateVector::linear_combination(&terms)?;
    Ok(DetectedExpansion {
        a00_b11: coeffs[0],
        a11_b00: coeffs[1],
        psi_plus: coeffs[2],
        psi_minus: coeffs[3],
        residual,
        pairing: *pairing,
    })
}

/// Charge content of detector A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceProbabilities {
    /// One π⁺ and one π⁻ in detector A: the interfering channel.
    pub p_plusminus_both: f64,
    pub p_plusplus_a: f64,
    pub p_minusminus_a: f64,
}

impl CoincidenceProbabilities {
    pub fn total(&self) -> f64 {
        self.p_plusminus_both + self.p_plusplus_a + self.p_minusminus_a
    }
}

fn require_two_qubits(rho: &DensityOperator, name: &str) -> Result<()> {
    if rho.dims() != [2, 2] {
        return arg(format!("{name} must be a two-qubit operator, got dims {:?}", rho.dims()));
    }
    Ok(())
}

/// Projector on detector A's two qubits (A₁A₂B₁B₂ ordering) onto the given
/// computational-basis contents, tensored with identity on detector B.
fn detector_a_projector(contents: &[usize]) -> Result<LinearOperator> {
    let pa = LinearOperator::from_fn(vec![2, 2], |i, j| {
        if i == j && contents.contains(&i) {
            ONE
        } else {
            ZERO
        }
    })?;
    pa.tensor(&LinearOperator::identity(vec![2, 2])?)
}

/// Probabilities of detector A's charge content for two independently
/// emitted pairs ρ₁₂ ⊗ ρ₃₄.
pub fn coincidence_probabilities(
    rho12: &DensityOperator,
    rho34: &DensityOperator,
    pairing: &PairingScheme,
) -> Result<CoincidenceProbabilities> {
    require_two_qubits(rho12, "rho12")?;
    require_two_qubits(rho34, "rho34")?;
    let joint = rho12.tensor(rho34)?.permute(&pairing.order())?;
    let prob = |contents: &[usize]| -> Result<f64> {
        Ok(joint.expectation(&detector_a_projector(contents)?)?.re)
    };
    Ok(CoincidenceProbabilities {
        p_plusminus_both: prob(&[1, 2])?,
        p_plusplus_a: prob(&[0])?,
        p_minusminus_a: prob(&[3])?,
    })
}

/// tr{P_A ⊗ P_B (ρ₁₂ ⊗ ρ₃₄)} with P the symmetric projector of each detector's pair.
pub fn symmetric_pair_probability(
    rho12: &DensityOperator,
    rho34: &DensityOperator,
    pairing: &PairingScheme,
) -> Result<f64> {
    require_two_qubits(rho12, "rho12")?;
    require_two_qubits(rho34, "rho34")?;
    let joint = rho12.tensor(rho34)?.permute(&pairing.order())?;
    let p = symmetric_projector(2)?;
    Ok(joint.expectation(&p.tensor(&p)?)?.re)
}

/// Projector onto the symmetric subspace span{|00⟩, Ψ⁺, |11⟩} of two qubits.
pub fn symmetric_projector(num_qubits: usize) -> Result<LinearOperator> {
    if num_qubits != 2 {
        return arg(format!("symmetric projector defined for 2 qubits, got {num_qubits}"));
    }
    let id = LinearOperator::identity(vec![2, 2])?;
    let swap = crate::linalg::swap_operator(2)?;
    Ok(id.add(&swap)?.scale(C64::new(0.5, 0.0)))
}

/// Inverts p_sym = (1 + tr ρ²)/2 for the symmetric outcome on two copies of ρ.
pub fn purity_from_symmetric_probability(p_sym: f64) -> Result<f64> {
    if !(0.5 - PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p_sym) {
        return Err(Error::Domain(format!(
            "symmetric-outcome probability {p_sym} outside [0.5, 1]"
        )));
    }
    Ok((2.0 * p_sym - 1.0).clamp(0.0, 1.0))
}

/// Probability that two copies ρ ⊗ ρ land in the swap-symmetric subspace.
pub fn two_copy_symmetric_probability(rho: &DensityOperator) -> Result<f64> {
    let d = rho.dim();
    let joint = rho.tensor(rho)?;
    let p_sym = LinearOperator::from_fn(joint.dims().to_vec(), |i, j| {
        let swapped = (j % d) * d + j / d;
        let mut v = ZERO;
        if i == j {
            v += C64::new(0.5, 0.0);
        }
        if i == swapped {
            v += C64::new(0.5, 0.0);
        }
        v
    })?;
    Ok(joint.expectation(&p_sym)?.re)
}

/// Outcome of the purity-comparison entanglement witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub global_purity: f64,
    pub local_purity_a: f64,
    pub local_purity_b: f64,
    pub p_symmetric_global: f64,
    /// True only if the global purity exceeds both local purities by the margin.
    /// A true verdict certifies entanglement; false is inconclusive.
    pub entangled: bool,
}

pub fn witness_verdict(rho: &DensityOperator) -> Result<WitnessReport> {
    if rho.dims().len() != 2 {
        return arg(format!("witness needs a bipartite state, got dims {:?}", rho.dims()));
    }
    let global_purity = rho.purity();
    let local_purity_a = rho.partial_trace(&[0])?.purity();
    let local_purity_b = rho.partial_trace(&[1])?.purity();
    let p_symmetric_global = two_copy_symmetric_probability(rho)?;
    let entangled = global_purity > local_purity_a + WITNESS_MARGIN
        && global_purity > local_purity_b + WITNESS_MARGIN;
    Ok(WitnessReport {
        global_purity,
        local_purity_a,
        local_purity_b,
        p_symmetric_global,
        entangled,
    })
}

/// p |Ψ⁺⟩⟨Ψ⁺| + (1 − p) I/4.
pub fn werner_state(p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("Werner weight {p} outside [0, 1]")));
    }
    let psi = bell_state(BellKind::PsiPlus).projector()?;
    let mixed = DensityOperator::maximally_mixed(vec![2, 2])?;
    DensityOperator::mixture(&[(p, psi), (1.0 - p, mixed)])
}

/// Builds a density operator from real and imaginary parts, validating it.
pub fn density_from_parts(dims: Vec<usize>, re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<DensityOperator> {
    let n = re.len();
    if im.len() != n || re.iter().chain(im).any(|row| row.len() != n) {
        return arg("real and imaginary parts must be square and of equal size");
    }
    let matrix = Array2::from_shape_fn((n, n), |(i, j)| C64::new(re[i][j], im[i][j]));
    DensityOperator::new(dims, matrix)
}
