use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{expectation, C64};
use crate::optics::{normalized_four_path_intensity, DetectorPair};

fn random_sector_state(space: &FockSpace, rng: &mut ChaCha8Rng) -> FockState {
    let basis = space.sector_basis(2, 2, 0).unwrap();
    FockState::from_terms(basis.states().iter().map(|b| {
        (b.clone(), C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }))
    .normalize()
    .unwrap()
}

fn random_acceptance(n: usize, rng: &mut ChaCha8Rng) -> Acceptance {
    let set: BTreeSet<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
    if set.is_empty() {
        Acceptance::All
    } else {
        Acceptance::Modes(set)
    }
}

/// ⟨0|b_{l₂}a_{k₂}b_{l₁}a_{k₁}|Ψ⟩ summed over accepted momenta, with the
/// ladder matrix elements written out from the occupation numbers.
fn momentum_basis_g4(state: &FockState, space: &FockSpace, d1: &Detector, d2: &Detector) -> f64 {
    let grid = space.grid();
    let n = grid.len();
    let mut amp = C64::new(0.0, 0.0);
    for k1 in (0..n).filter(|&m| d1.acceptance.accepts(m)) {
        for l1 in (0..n).filter(|&m| d1.acceptance.accepts(m)) {
            for k2 in (0..n).filter(|&m| d2.acceptance.accepts(m)) {
                for l2 in (0..n).filter(|&m| d2.acceptance.accepts(m)) {
                    let mut occ = FockBasisState::vacuum(space);
                    occ.occ_plus[k1] += 1;
                    occ.occ_plus[k2] += 1;
                    occ.occ_minus[l1] += 1;
                    occ.occ_minus[l2] += 1;
                    let f = |a: usize, b: usize| if a == b { 2f64.sqrt() } else { 1.0 };
                    let theta = grid.momentum(k1) * d1.position - grid.momentum(l1) * d1.position
                        + grid.momentum(k2) * d2.position
                        - grid.momentum(l2) * d2.position;
                    amp += state.amplitude(&occ) * f(k1, k2) * f(l1, l2) * C64::from_polar(1.0, theta);
                }
            }
        }
    }
    amp.norm_sqr()
}

/// Sector probabilities for acceptances that partition the modes.
fn projector_probs(state: &FockState, a1: &Acceptance) -> [f64; 3] {
    let mut p = [0.0; 3];
    for (b, a) in state.iter() {
        let in1 = |occ: &[u8]| -> usize {
            occ.iter().enumerate().filter(|(m, _)| a1.accepts(*m)).map(|(_, &n)| n as usize).sum()
        };
        match (in1(&b.occ_plus), in1(&b.occ_minus)) {
            (1, 1) => p[0] += a.norm_sqr(),
            (2, 0) => p[1] += a.norm_sqr(),
            (0, 2) => p[2] += a.norm_sqr(),
            _ => {}
        }
    }
    let total: f64 = p.iter().sum();
    p.map(|x| x / total)
}

#[test]
fn g4_matches_momentum_basis_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let space = FockSpace::new(ModeGrid::uniform(5, 0.8).unwrap(), vec![], 4).unwrap();
    for _ in 0..20 {
        let state = random_sector_state(&space, &mut rng);
        let d1 = Detector::with_acceptance(rng.random_range(-4.0..4.0), random_acceptance(5, &mut rng));
        let d2 = Detector::with_acceptance(rng.random_range(-4.0..4.0), random_acceptance(5, &mut rng));
        let direct = g4_coincidence(&state, &space, &d1, &d2, 0.0).unwrap();
        let oracle = momentum_basis_g4(&state, &space, &d1, &d2);
        assert!((direct - oracle).abs() < 1e-10 * oracle.max(1.0), "{direct} vs {oracle}");
        let poly = DetectionPolynomial::build(&state, &space, &correlation_slots(&d1, &d2), 0.0).unwrap();
        assert!((poly.point_value() - direct).abs() < 1e-10 * direct.max(1.0));
    }
}

fn correlation_slots<'a>(d1: &'a Detector, d2: &'a Detector) -> Vec<Slot<'a>> {
    vec![
        Slot { species: Species::PiPlus, detector: d1 },
        Slot { species: Species::PiMinus, detector: d1 },
        Slot { species: Species::PiPlus, detector: d2 },
        Slot { species: Species::PiMinus, detector: d2 },
    ]
}

#[test]
fn dense_observable_agrees_and_is_hermitian() {
    let cfg = minimal_two_source_configuration(4, 1.0, 0.7).unwrap();
    let d2 = cfg.d2.at(1.3);
    let obs = g4_observable(&cfg.space, &cfg.d1, &d2, 0.4).unwrap();
    assert!(obs.is_hermitian(1e-12));
    let basis = cfg.space.basis().unwrap();
    let v = cfg.state.to_state_vector(&basis).unwrap();
    let dense = expectation(&v, &obs).unwrap();
    assert!(dense.im.abs() < 1e-12);
    let sparse = g4_coincidence(&cfg.state, &cfg.space, &cfg.d1, &d2, 0.4).unwrap();
    assert!((dense.re - sparse).abs() < 1e-12);
}

#[test]
fn full_acceptance_observable_is_hermitian() {
    let space = FockSpace::new(ModeGrid::uniform(3, 0.5).unwrap(), vec![2.0], 4).unwrap();
    let obs = g4_observable(&space, &Detector::new(0.2), &Detector::new(-1.1), 0.9).unwrap();
    assert!(obs.is_hermitian(1e-12));
}

#[test]
fn minimal_configuration_reproduces_four_path() {
    let cfg = minimal_two_source_configuration(4, 1.0, 2.5).unwrap();
    let k = cfg.momenta.unwrap();
    for i in 0..100 {
        let b = 0.05 * i as f64;
        let d2 = cfg.d2.at(cfg.d1.position + b);
        let fock = normalized_g4(&cfg.state, &cfg.space, &cfg.d1, &d2, 0.0, Window::FullPeriod).unwrap();
        let optics = normalized_four_path_intensity(k, &DetectorPair::new(cfg.d1.position, d2.position)).unwrap();
        assert!((fock - optics).abs() < 1e-9, "b={b}: {fock} vs {optics}");
    }
}

#[test]
fn source_separation_adds_no_phase() {
    let a = minimal_two_source_configuration(4, 1.0, 0.0).unwrap();
    let b = minimal_two_source_configuration(4, 1.0, 3.7).unwrap();
    for x in [0.0, 0.4, 1.9] {
        let ga = normalized_g4(&a.state, &a.space, &a.d1, &a.d2.at(x), 0.0, Window::FullPeriod).unwrap();
        let gb = normalized_g4(&b.state, &b.space, &b.d1, &b.d2.at(x), 0.0, Window::FullPeriod).unwrap();
        assert!((ga - gb).abs() < 1e-12);
    }
}

#[test]
fn single_source_is_flat() {
    let cfg = single_source_configuration(6, 1.0).unwrap();
    let seps: Vec<f64> = (0..30).map(|i| 0.13 * i as f64).collect();
    let scan = correlation_scan(&cfg.state, &cfg.space, &cfg.d1, &cfg.d2, 0.0, Window::FullPeriod, &seps).unwrap();
    for g in scan {
        assert!((g - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fully_entangled_weights() {
    for n in [4, 6, 8] {
        let cfg = fully_entangled_configuration(n, 1.0).unwrap();
        let p = charge_resolved_probs(&cfg.state, &cfg.space, &cfg.d1, &cfg.d2, 0.0, Window::FullPeriod).unwrap();
        assert!((p.p_mixed_both - 0.5).abs() < 1e-10);
        assert!((p.p_plusplus_at_1 - 0.25).abs() < 1e-10);
        assert!((p.p_minusminus_at_1 - 0.25).abs() < 1e-10);
    }
}

#[test]
fn product_charges_are_definite() {
    let cfg = product_charge_configuration(5, 1.0).unwrap();
    let p = charge_resolved_probs(&cfg.state, &cfg.space, &cfg.d1, &cfg.d2, 0.0, Window::FullPeriod).unwrap();
    assert_eq!((p.p_mixed_both, p.p_plusplus_at_1, p.p_minusminus_at_1), (0.0, 1.0, 0.0));
}

#[test]
fn charge_probs_match_sector_projectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let space = FockSpace::new(ModeGrid::uniform(4, 1.0).unwrap(), vec![], 4).unwrap();
    for _ in 0..20 {
        let state = random_sector_state(&space, &mut rng);
        let a1: BTreeSet<usize> = (0..4).filter(|_| rng.random_bool(0.5)).collect();
        let a2: BTreeSet<usize> = (0..4).filter(|m| !a1.contains(m)).collect();
        let d1 = Detector::with_acceptance(rng.random_range(-3.0..3.0), Acceptance::Modes(a1));
        let d2 = Detector::with_acceptance(rng.random_range(-3.0..3.0), Acceptance::Modes(a2));
        let Ok(p) = charge_resolved_probs(&state, &space, &d1, &d2, 0.3, Window::FullPeriod) else {
            continue;
        };
        let oracle = projector_probs(&state, &d1.acceptance);
        assert!((p.p_mixed_both - oracle[0]).abs() < 1e-10);
        assert!((p.p_plusplus_at_1 - oracle[1]).abs() < 1e-10);
        assert!((p.p_minusminus_at_1 - oracle[2]).abs() < 1e-10);
        assert!((p.total() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn charge_probs_reject_other_sectors() {
    let grid = ModeGrid::uniform(4, 1.0).unwrap();
    let spec = PairSourceSpec::uniform(&grid, 5.0, 5.0, 0.0).unwrap();
    let space = FockSpace::new(grid, vec![5.0], 4).unwrap();
    let one_pair = pair_state(&spec, &space).unwrap();
    let d = Detector::new(0.0);
    assert!(charge_resolved_probs(&one_pair, &space, &d, &d, 0.0, Window::FullPeriod).is_err());
    let fo = first_order_state(&HamiltonianConfig::new(0.1, 1.0).unwrap(), &spec, &space).unwrap();
    assert!(charge_resolved_probs(&fo.state, &space, &d, &d, 0.0, Window::FullPeriod).is_err());
    assert_eq!(g4_coincidence(&fo.state, &space, &d, &d, 0.0).unwrap(), 0.0);
}

#[test]
fn finite_window_approaches_full_period() {
    let cfg = fully_entangled_configuration(6, 1.0).unwrap();
    let full = std::f64::consts::TAU;
    let p = charge_resolved_probs(&cfg.state, &cfg.space, &cfg.d1, &cfg.d2, 0.0, Window::Length(full)).unwrap();
    assert!((p.p_mixed_both - 0.5).abs() < 1e-10);
    let wide = charge_resolved_probs(&cfg.state, &cfg.space, &cfg.d1, &cfg.d2, 0.0, Window::Length(1e-9)).unwrap();
    assert!((wide.total() - 1.0).abs() < 1e-10);
}

#[test]
fn truncation_cap_does_not_matter() {
    let cfg = minimal_two_source_configuration(5, 1.0, 1.2).unwrap();
    let bigger = cfg.space.with_n_max(8).unwrap();
    let state8 = product_pair_state(&cfg.sources, &bigger).unwrap();
    assert!(state8.max_abs_diff(&cfg.state) <= 1e-12);
    let g4 = g4_coincidence(&cfg.state, &cfg.space, &cfg.d1, &cfg.d2.at(0.8), 0.0).unwrap();
    let g8 = g4_coincidence(&state8, &bigger, &cfg.d1, &cfg.d2.at(0.8), 0.0).unwrap();
    assert!((g4 - g8).abs() <= 1e-12);
    let ent = fully_entangled_configuration(5, 1.0).unwrap();
    let big = ent.space.with_n_max(8).unwrap();
    let s8 = product_pair_state(&ent.sources, &big).unwrap();
    let p4 = charge_resolved_probs(&ent.state, &ent.space, &ent.d1, &ent.d2, 0.0, Window::FullPeriod).unwrap();
    let p8 = charge_resolved_probs(&s8, &big, &ent.d1, &ent.d2, 0.0, Window::FullPeriod).unwrap();
    assert!((p4.p_mixed_both - p8.p_mixed_both).abs() <= 1e-12);
}

#[test]
fn source_order_is_irrelevant() {
    let cfg = fully_entangled_configuration(6, 1.0).unwrap();
    let mut rev = cfg.sources.clone();
    rev.reverse();
    let swapped = product_pair_state(&rev, &cfg.space).unwrap();
    assert!(swapped.max_abs_diff(&cfg.state) < 1e-12);
}

#[test]
fn two_pair_states_conserve_momentum() {
    let cfg = fully_entangled_configuration(7, 0.5).unwrap();
    let total: f64 = cfg.sources.iter().map(|s| s.q_rho).sum();
    let grid = cfg.space.grid();
    for (b, a) in cfg.state.iter() {
        if a.norm() == 0.0 {
            continue;
        }
        let p: f64 = b.occ_plus.iter().chain(&b.occ_minus).enumerate()
            .map(|(i, &n)| n as f64 * grid.momentum(i % grid.len()))
            .sum();
        assert_eq!(p, total);
    }
}

#[test]
fn scan_is_deterministic_across_threads() {
    let cfg = minimal_two_source_configuration(6, 0.5, 1.0).unwrap();
    let seps: Vec<f64> = (0..40).map(|i| 0.21 * i as f64).collect();
    let scan = correlation_scan(&cfg.state, &cfg.space, &cfg.d1, &cfg.d2, 0.0, Window::FullPeriod, &seps).unwrap();
    for (b, g) in seps.iter().zip(&scan) {
        let seq = normalized_g4(&cfg.state, &cfg.space, &cfg.d1, &cfg.d2.at(cfg.d1.position + b), 0.0, Window::FullPeriod).unwrap();
        assert_eq!(seq.to_bits(), g.to_bits());
    }
}

#[test]
fn perturbative_amplitude_is_linear() {
    let grid = ModeGrid::uniform(4, 1.0).unwrap();
    let spec = PairSourceSpec::uniform(&grid, 5.0, 5.0, 0.0).unwrap();
    let space = FockSpace::new(grid, vec![5.0], 4).unwrap();
    let xs: Vec<f64> = (0..10).map(|i| 1e-3 * 10f64.powf(i as f64 / 9.0)).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&gdt| first_order_state(&HamiltonianConfig::new(gdt, 1.0).unwrap(), &spec, &space).unwrap().c1.norm())
        .collect();
    let slope = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / xs.iter().map(|x| x * x).sum::<f64>();
    assert!((slope - 1.0).abs() < 1e-3);
}
