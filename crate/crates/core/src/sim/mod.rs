//! Dense statevector simulation: registers, gates, controlled procedures,
//! the Fourier transform and query ledgers.

mod controls;
mod layout;
mod ledger;
mod ops;
mod qft;
mod state;

pub use controls::Controls;
pub use layout::{Register, RegisterLayout};
pub use ledger::{CountedOracle, Ledger, LedgerSnapshot, Relocatable};
pub use ops::{
    apply_controlled, apply_gate, applied, Adjoint, BranchControlled, Controlled, DiagonalPhase, Gate,
    GlobalPhase, Involution, Op, PhaseFlip, Sequence, StatePrep, Unitary,
};
pub use qft::{apply_inverse_qft, apply_qft, qft_circuit, Qft};
pub use state::{sample_index, StateVector, C64, DRIFT_TOLERANCE, MAX_QUBITS, STATE_TOLERANCE};

pub(crate) use state::check_width;

use crate::error::Result;

/// Pr[register named `name` = value].
pub fn marginal_probability(state: &StateVector, layout: &RegisterLayout, name: &str, value: u64) -> Result<f64> {
    state.marginal_probability(layout.register(name)?, value)
}

/// Measurement distribution of the register named `name`.
pub fn outcome_distribution(state: &StateVector, layout: &RegisterLayout, name: &str) -> Result<Vec<f64>> {
    state.outcome_distribution(layout.register(name)?)
}
