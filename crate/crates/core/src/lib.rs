//! Phase-stable control of clock-referenced, optically driven trapped-ion qubits.
//!
//! The crate is split along the path a phase takes before it reaches an ion:
//!
//! * [`signal_chain`] propagates tones through the master-oscillator referenced
//!   RF/optical circuit (comb, PLL feed-forward, mixers, AWG, AOMs) and checks
//!   that repetition-rate drift never reaches the ion.
//! * [`freq_planner`] solves the integer comb-tooth resonance conditions for
//!   copropagating carrier transitions and two-sideband entangling gates.
//! * [`qubit`] holds the two-qubit register, carrier rotations, the
//!   Mølmer–Sørensen map and the geometry-dependent gate-phase algebra.
//! * [`experiments`] runs seeded measurement scenarios on top of the above and
//!   fits fringes and decays out of the simulated data.
//! * [`config`] is the single structured text file that fully determines a run.
//!
//! All frequencies are in Hz, phases in radians, lengths in metres and times in
//! seconds unless a field name says otherwise.

pub mod band;
pub mod config;
pub mod experiments;
pub mod freq_planner;
pub mod qubit;
pub mod signal_chain;

pub use band::{Band, Sign, ToothRange};

/// Wraps an angle into (−π, π].
pub fn wrap_phase(phase: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut wrapped = phase.rem_euclid(TAU);
    if wrapped > PI {
        wrapped -= TAU;
    }
    wrapped
}
