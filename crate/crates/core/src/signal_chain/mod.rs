//! Frequency and phase propagation through the master-oscillator referenced
//! phase-coherence circuit.
//!
//! The fast photodiode turns the pulsed laser into harmonics `k·(νr + δr)`.
//! Mixing them with the master oscillator yields beat-notes that PLLs lock to
//! and feed forward into the AOM B drives, so that drift of the repetition rate
//! cancels in every beat-note the ion sees. [`ChainGraph`] is a generic acyclic
//! tone graph; [`build_preset`] wires the two circuits this crate knows about.

mod drive;
mod graph;
mod preset;
mod tone;

pub use graph::{
    comb_tooth, BeatSelector, CarrierCoupling, ChainGraph, IonCouplings, MixMode, Node, NodeKind,
    Propagation, Route, SidebandCoupling,
};
pub use preset::{build_preset, AomSpec, CombSpec, PresetParams};
pub use tone::{DriftProfile, PhaseNoise, Tone};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::{Band, ToothRange};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("invalid signal graph: {0}")]
    InvalidGraph(String),
    #[error("no node named `{0}`")]
    UnknownNode(String),
    #[error("invalid drift profile: {0}")]
    InvalidDrift(String),
    #[error("comb tooth {tooth} outside tooth range {}..={}", range.lo, range.hi)]
    ToothOutOfRange { tooth: i64, range: ToothRange },
    #[error("passband of mixer `{mixer}` removes every tone")]
    EmptyOutput { mixer: String },
    #[error("PLL `{pll}` finds no beat-note within capture range of {target} Hz")]
    Unlocked { pll: String, target: f64 },
    #[error("node `{node}`: drive tone at {frequency} Hz outside {band}")]
    OutOfBand { node: String, frequency: f64, band: Band },
    #[error("constraint violated at `{node}`: {reason}")]
    ConstraintViolation { node: String, reason: String },
    #[error("chain not configured for {transition}: {reason}")]
    Configuration { transition: Transition, reason: String },
    #[error("chain has no ion couplings attached")]
    NotCoupled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// One PLL per comb-tooth solution (`n`, `m`, `p`).
    ThreePll,
    /// A single PLL serving `n = m = p`.
    SinglePll,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::ThreePll => "three_pll",
            Preset::SinglePll => "single_pll",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    CarrierCopropagating,
    RedSideband,
    BlueSideband,
    Microwave,
}

impl Transition {
    pub const ALL: [Transition; 4] = [
        Transition::RedSideband,
        Transition::BlueSideband,
        Transition::CarrierCopropagating,
        Transition::Microwave,
    ];
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transition::CarrierCopropagating => "carrier_copropagating",
            Transition::RedSideband => "red_sideband",
            Transition::BlueSideband => "blue_sideband",
            Transition::Microwave => "microwave",
        })
    }
}
