use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{field_operator_with_acceptance, species_phase_sign, Acceptance, FieldSign};
use super::grid::momenta_match;
use super::space::{FockBasisState, FockSpace, FockState, Species};
use crate::error::{arg, Result};
use crate::linalg::{LinearOperator, C64, EPS};
use crate::optics::sinc;

/// Tolerance on the norm of states handed to correlators.
const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Detector {
    pub position: f64,
    pub acceptance: Acceptance,
}

impl Detector {
    pub fn new(position: f64) -> Self {
        Self {
            position,
            acceptance: Acceptance::All,
        }
    }

    pub fn with_acceptance(position: f64, acceptance: Acceptance) -> Self {
        Self { position, acceptance }
    }

    pub fn at(&self, position: f64) -> Self {
        Self {
            position,
            acceptance: self.acceptance.clone(),
        }
    }
}

/// Position window each detected particle is averaged over.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum Window {
    /// One full period 2π/h of the grid spacing h; needs a uniform grid.
    #[default]
    FullPeriod,
    /// Window of the given length centred on the detector.
    Length(f64),
}

/// One annihilation in a detection sequence: a species removed at a detector.
#[derive(Debug, Clone, Copy)]
pub struct Slot<'a> {
    pub species: Species,
    pub detector: &'a Detector,
}

#[derive(Debug, Clone)]
struct Term {
    /// Position wavenumber per slot; the amplitude carries Π e^{i w_j x_j}.
    waves: Vec<f64>,
    coeff: C64,
}

/// Detection amplitude expanded over mode assignments and final states.
#[derive(Debug, Clone)]
pub struct DetectionPolynomial {
    positions: Vec<f64>,
    groups: Vec<Vec<Term>>,
}

impl DetectionPolynomial {
    /// Applies the slot annihilators to `state`, first slot first.
    pub fn build(state: &FockState, space: &FockSpace, slots: &[Slot<'_>], t: f64) -> Result<Self> {
        let grid = space.grid();
        for s in slots {
            if s.species == Species::Rho {
                return arg("detectors register pions only");
            }
            if !s.detector.position.is_finite() {
                return arg("detector position must be finite");
            }
            s.detector.acceptance.validate(grid.len())?;
        }
        if !t.is_finite() {
            return arg("time must be finite");
        }
        state.check_shape(space)?;
        let mut items: BTreeMap<(FockBasisState, Vec<usize>), C64> = state
            .iter()
            .map(|(b, a)| ((b.clone(), Vec::new()), *a))
            .collect();
        for s in slots {
            let sigma = species_phase_sign(s.species);
            let mut next: BTreeMap<(FockBasisState, Vec<usize>), C64> = BTreeMap::new();
            for ((basis, modes), amp) in &items {
                let occ = basis.occupations(s.species);
                for (mode, &n) in occ.iter().enumerate() {
                    if n == 0 || !s.detector.acceptance.accepts(mode) {
                        continue;
                    }
                    let mut reduced = basis.clone();
                    match s.species {
                        Species::PiPlus => reduced.occ_plus[mode] -= 1,
                        _ => reduced.occ_minus[mode] -= 1,
                    }
                    let mut path = modes.clone();
                    path.push(mode);
                    let c = amp
                        * (n as f64).sqrt()
                        * C64::from_polar(1.0, -sigma * grid.omega(mode) * t);
                    *next.entry((reduced, path)).or_default() += c;
                }
            }
            items = next;
        }
        let mut by_final: BTreeMap<FockBasisState, Vec<Term>> = BTreeMap::new();
        for ((basis, modes), coeff) in items {
            let waves = modes
                .iter()
                .zip(slots)
                .map(|(&m, s)| species_phase_sign(s.species) * grid.momentum(m))
                .collect();
            by_final.entry(basis).or_default().push(Term { waves, coeff });
        }
        Ok(Self {
            positions: slots.iter().map(|s| s.detector.position).collect(),
            groups: by_final.into_values().collect(),
        })
    }

    pub fn n_terms(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// ‖O Ψ‖² with every slot at its detector position.
    pub fn point_value(&self) -> f64 {
        self.groups
            .iter()
            .map(|group| {
                group
                    .iter()
                    .map(|term| {
                        let theta: f64 = term.waves.iter().zip(&self.positions).map(|(w, x)| w * x).sum();
                        term.coeff * C64::from_polar(1.0, theta)
                    })
                    .sum::<C64>()
                    .norm_sqr()
            })
            .sum()
    }

    /// ‖O Ψ‖² averaged independently over each slot's window.
    ///
    /// A window of length L centred on x turns e^{iΔw x} into
    /// e^{iΔw x}·sinc(Δw L / 2); `None` means an exact full period, where
    /// only equal wavenumbers survive.
    pub fn window_average(&self, length: Option<f64>) -> f64 {
        let mut total = 0.0;
        for group in &self.groups {
            for a in group {
                for b in group {
                    let mut factor = a.coeff * b.coeff.conj();
                    for ((wa, wb), x) in a.waves.iter().zip(&b.waves).zip(&self.positions) {
                        let dw = wa - wb;
                        match length {
                            None if momenta_match(*wa, *wb) => {}
                            None => {
                                factor = C64::new(0.0, 0.0);
                                break;
                            }
                            Some(l) => factor *= C64::from_polar(sinc(dw * l / 2.0), dw * x),
                        }
                    }
                    total += factor.re;
                }
            }
        }
        total
    }
}

fn window_length(window: Window, space: &FockSpace) -> Result<Option<f64>> {
    match window {
        Window::FullPeriod => {
            let h = space.grid().spacing().ok_or_else(|| {
                crate::Error::Argument("a full-period window needs a uniformly spaced grid".into())
            })?;
            if !(h > 0.0) {
                return arg("grid spacing must be positive");
            }
            Ok(None)
        }
        Window::Length(l) if l.is_finite() && l > 0.0 => Ok(Some(l)),
        Window::Length(l) => arg(format!("window length must be positive, got {l}")),
    }
}

fn check_normalized(state: &FockState) -> Result<()> {
    let n = state.norm_sqr().sqrt();
    if (n - 1.0).abs() > NORM_TOL {
        return arg(format!("state must be normalized, norm is {n}"));
    }
    Ok(())
}

fn g4_slots<'a>(d1: &'a Detector, d2: &'a Detector) -> [Slot<'a>; 4] {
    [
        Slot { species: Species::PiPlus, detector: d1 },
        Slot { species: Species::PiMinus, detector: d1 },
        Slot { species: Species::PiPlus, detector: d2 },
        Slot { species: Species::PiMinus, detector: d2 },
    ]
}

/// ⟨Ψ|O†O|Ψ⟩ with O = (ψ†)⁺(x₂)ψ⁺(x₂)(ψ†)⁺(x₁)ψ⁺(x₁), each detector summing
/// only over its accepted modes.
pub fn g4_coincidence(state: &FockState, space: &FockSpace, d1: &Detector, d2: &Detector, t: f64) -> Result<f64> {
    check_normalized(state)?;
    state.check_shape(space)?;
    let mut image = state.clone();
    for slot in g4_slots(d1, d2) {
        let op = field_operator_with_acceptance(
            space.grid(),
            slot.species,
            FieldSign::Plus,
            slot.detector.position,
            t,
            &slot.detector.acceptance,
        )?;
        image = op.apply(&image, space);
    }
    Ok(image.norm_sqr())
}

/// The same observable O†O as a dense matrix on the truncated basis.
pub fn g4_observable(space: &FockSpace, d1: &Detector, d2: &Detector, t: f64) -> Result<LinearOperator> {
    let mut o: Option<LinearOperator> = None;
    for slot in g4_slots(d1, d2) {
        let m = field_operator_with_acceptance(
            space.grid(),
            slot.species,
            FieldSign::Plus,
            slot.detector.position,
            t,
            &slot.detector.acceptance,
        )?
        .matrix(space)?;
        o = Some(match o {
            None => m,
            Some(prev) => m.compose(&prev)?,
        });
    }
    let o = o.expect("four slots");
    o.adjoint().compose(&o)
}

/// Acceptance-window average of g4 at the two detectors.
pub fn g4_window_average(
    state: &FockState,
    space: &FockSpace,
    d1: &Detector,
    d2: &Detector,
    t: f64,
    window: Window,
) -> Result<f64> {
    check_normalized(state)?;
    let length = window_length(window, space)?;
    let poly = DetectionPolynomial::build(state, space, &g4_slots(d1, d2), t)?;
    Ok(poly.window_average(length))
}

/// g4 at the detector positions divided by its window average.
pub fn normalized_g4(
    state: &FockState,
    space: &FockSpace,
    d1: &Detector,
    d2: &Detector,
    t: f64,
    window: Window,
) -> Result<f64> {
    let avg = g4_window_average(state, space, d1, d2, t, window)?;
    if avg <= EPS {
        return arg("no coincidences within the detector acceptance");
    }
    Ok(g4_coincidence(state, space, d1, d2, t)? / avg)
}

/// Normalized g4 with detector 2 at x₁ + b for each separation b.
pub fn correlation_scan(
    state: &FockState,
    space: &FockSpace,
    d1: &Detector,
    d2: &Detector,
    t: f64,
    window: Window,
    separations: &[f64],
) -> Result<Vec<f64>> {
    separations
        .par_iter()
        .map(|&b| {
            let far = d2.at(d1.position + b);
            let avg = g4_window_average(state, space, d1, &far, t, window)?;
            if avg <= EPS {
                return arg("no coincidences within the detector acceptance");
            }
            Ok(g4_coincidence(state, space, d1, &far, t)? / avg)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeProbabilities {
    pub p_mixed_both: f64,
    pub p_plusplus_at_1: f64,
    pub p_minusminus_at_1: f64,
}

impl ChargeProbabilities {
    pub fn total(&self) -> f64 {
        self.p_mixed_both + self.p_plusplus_at_1 + self.p_minusminus_at_1
    }
}

/// Relative rates of the three charge patterns of a two-pair coincidence:
/// π⁺π⁻ at both detectors, π⁺π⁺ at detector 1, π⁻π⁻ at detector 1.
pub fn charge_resolved_probs(
    state: &FockState,
    space: &FockSpace,
    d1: &Detector,
    d2: &Detector,
    t: f64,
    window: Window,
) -> Result<ChargeProbabilities> {
    check_normalized(state)?;
    let sectors = state.sectors(EPS);
    if sectors.iter().any(|&s| s != (2, 2, 0)) {
        return arg(format!(
            "charge-resolved rates need a pure two-pair state, found sectors {sectors:?}"
        ));
    }
    let length = window_length(window, space)?;
    let (p, m) = (Species::PiPlus, Species::PiMinus);
    let rate = |pattern: [(Species, &Detector); 4]| -> Result<f64> {
        let slots: Vec<Slot<'_>> = pattern
            .iter()
            .map(|&(species, detector)| Slot { species, detector })
            .collect();
        Ok(DetectionPolynomial::build(state, space, &slots, t)?.window_average(length))
    };
    // identical particles at one detector are counted twice over mode orderings
    let mixed = rate([(p, d1), (m, d1), (p, d2), (m, d2)])?;
    let plusplus = rate([(p, d1), (p, d1), (m, d2), (m, d2)])? / 4.0;
    let minusminus = rate([(m, d1), (m, d1), (p, d2), (p, d2)])? / 4.0;
    let total = mixed + plusplus + minusminus;
    if total <= EPS {
        return arg("no coincidences within the detector acceptance");
    }
    Ok(ChargeProbabilities {
        p_mixed_both: mixed / total,
        p_plusplus_at_1: plusplus / total,
        p_minusminus_at_1: minusminus / total,
    })
}
