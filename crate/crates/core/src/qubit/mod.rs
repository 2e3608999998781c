//! Two-qubit state, carrier rotations and the Mølmer–Sørensen map, with the
//! phase bookkeeping that links RF tone phases and beam geometry to the gate
//! phase.

mod alignment;
mod phases;
mod state;

pub use alignment::{alignment_signal, max_misalignment_angle, misalignment_phase};
pub use phases::{gate_phase_from_rf, sideband_phases, BeamGeometry, GatePhaseSet, Geometry, NoiseState, RfPhases};
pub use state::{ms_gate, parity, rotate, TwoQubitState, NORM_TOLERANCE};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QubitError {
    #[error("qubit index must be 1 or 2, got {0}")]
    InvalidQubit(u8),
    #[error("state is not normalised: |ψ|² = {0}")]
    NotNormalized(f64),
    #[error("contrast {0} outside [0, 1]")]
    InvalidContrast(f64),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}
