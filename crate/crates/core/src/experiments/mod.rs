//! Seeded measurement scenarios and the fits that read them out.
//!
//! Every sweep point draws from its own ChaCha8 stream derived from the run
//! seed and the point index, so points run in parallel and results are
//! bit-identical for a given configuration and seed.

mod budget;
mod config;
mod fit;
mod measure;
mod result;
mod scenarios;

pub use budget::{error_budget, FidelityEstimate};
pub use config::{
    AlignmentOptions, AnalysisSource, NoiseSpec, ParityScanOptions, RamseyOptions, RandomPhaseOptions, ScenarioConfig,
    ScenarioId, Sideband, SidebandShiftOptions, StabilityOptions, Sweep,
};
pub use fit::{fit_gaussian_decay, fit_line, fit_sinusoid, unwrap_phases, DecayFit, LineFit, SinusoidFit};
pub use measure::{expected_bit, expected_parity, sample_bit, sample_parity, Tally};
pub use result::{NoiseDraw, Row, RunResult};
pub use scenarios::{
    run_alignment_scan, run_parity_scan, run_ramsey, run_random_phase, run_scenario, run_sideband_shift,
    run_stability,
};

use thiserror::Error;

use crate::qubit::QubitError;
use crate::signal_chain::ChainError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("configuration is for scenario {got}, expected {expected}")]
    ConfigMismatch { expected: ScenarioId, got: ScenarioId },
    #[error("invalid scenario configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("not enough data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Qubit(#[from] QubitError),
}
