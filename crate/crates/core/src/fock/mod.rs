//! Truncated bosonic Fock space over discrete momentum modes.
//!
//! π⁺ and π⁻ share one momentum grid; ρ modes sit on their own list of
//! momenta. States are sparse maps from occupation vectors to amplitudes and
//! only become dense matrices on request, subject to the global dimension cap.

mod config;
mod correlation;
mod field;
mod grid;
mod source;
mod space;

#[cfg(test)]
mod tests;

pub use config::{
    fully_entangled_configuration, minimal_two_source_configuration, product_charge_configuration,
    single_source_configuration, TwoPairConfiguration,
};
pub use correlation::{
    charge_resolved_probs, correlation_scan, g4_coincidence, g4_observable, g4_window_average,
    normalized_g4, ChargeProbabilities, DetectionPolynomial, Detector, Slot, Window,
};
pub use field::{
    annihilation_matrix, field_operator, field_operator_with_acceptance, Acceptance, FieldOperator,
    FieldSign,
};
pub use grid::{Dispersion, ModeGrid};
pub use source::{
    first_order_state, pair_state, product_pair_state, FirstOrderState, HamiltonianConfig,
    PairSourceSpec, Splitting, PERTURBATIVE_LIMIT,
};
pub use space::{FockBasis, FockBasisState, FockSpace, FockState, Species, DEFAULT_N_MAX};
