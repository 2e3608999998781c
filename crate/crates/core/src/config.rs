//! The run configuration file.
//!
//! One TOML document fully determines a run:
//!
//! ```toml
//! schema_version = 1
//!
//! [planner]            # resonance search inputs
//! [chain]              # circuit preset, plan selection, AOM bands
//! [geometry]           # beam geometry and ion positions
//! [noise]              # dephasing, drifts, readout
//! [scenario]           # id, seed, shots, sweep, analysis source
//! [ramsey]             # per-scenario tables, all optional
//! ```
//!
//! Every table and field is optional; missing values take the nominal defaults.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::Path;
use thiserror::Error;

use crate::experiments::{
    AlignmentOptions, AnalysisSource, ExperimentError, NoiseSpec, ParityScanOptions, RamseyOptions,
    RandomPhaseOptions, RunResult, ScenarioConfig, ScenarioId, SidebandShiftOptions, StabilityOptions, Sweep,
};
use crate::freq_planner::{plan_copropagating, plan_gate, CoPropPlan, GatePlan, PlannerError, PlannerInput};
use crate::qubit::{BeamGeometry, Geometry};
use crate::signal_chain::{build_preset, AomSpec, ChainError, ChainGraph, CombSpec, DriftProfile, Preset, PresetParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{}", match (line, column) { (Some(l), Some(c)) => format!("line {l}, column {c}: {message}"), _ => message.clone() })]
    Parse { message: String, line: Option<usize>, column: Option<usize> },
    #[error("unsupported schema_version {0}, this build reads {SCHEMA_VERSION}")]
    Schema(u32),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

/// A plan or chain that cannot be realised, as opposed to a malformed file.
#[derive(Debug, Error)]
pub enum SetupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error("no feasible plan: {}", .0.join("; "))]
    Infeasible(Vec<String>),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSettings {
    pub preset: Preset,
    pub master_frequency: f64,
    pub aom_b_center: f64,
    pub aom_b_bandwidth: f64,
    pub aom_a_bandwidth: f64,
    /// Gate plan selection; unset takes the best-ranked plan.
    pub n: Option<i64>,
    pub m: Option<i64>,
    /// Copropagating plan selection; unset takes the best-ranked plan.
    pub p: Option<i64>,
    pub feed_forward: bool,
    pub comb_phase_offset: f64,
    pub drift: DriftProfile,
}

impl Default for ChainSettings {
    fn default() -> Self {
        Self {
            preset: Preset::ThreePll,
            master_frequency: 12_606e6,
            aom_b_center: 165e6,
            aom_b_bandwidth: 30e6,
            aom_a_bandwidth: 30e6,
            n: None,
            m: None,
            p: None,
            feed_forward: true,
            comb_phase_offset: 0.0,
            drift: DriftProfile::none(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySettings {
    pub kind: Geometry,
    /// λ' = 2π/Δk, m.
    pub wavelength: f64,
    pub positions: [f64; 2],
    /// θε, rad.
    pub misalignment: f64,
}

impl Default for GeometrySettings {
    fn default() -> Self {
        let g = BeamGeometry::nominal(Geometry::Insensitive);
        Self { kind: g.geometry, wavelength: g.effective_wavelength(), positions: g.positions, misalignment: 0.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub id: ScenarioId,
    pub seed: u64,
    /// Unset takes the scenario default.
    pub shots: Option<u32>,
    pub sweep: Option<Sweep>,
    pub analysis_source: AnalysisSource,
    pub analysis_offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub planner: PlannerInput,
    pub chain: ChainSettings,
    pub geometry: GeometrySettings,
    /// Unset takes the scenario's default noise.
    pub noise: Option<NoiseSpec>,
    pub scenario: ScenarioSection,
    pub ramsey: RamseyOptions,
    pub parity_scan: ParityScanOptions,
    pub sideband_shift: SidebandShiftOptions,
    pub random_phase: RandomPhaseOptions,
    pub stability: StabilityOptions,
    pub alignment: AlignmentOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            planner: PlannerInput::default(),
            chain: ChainSettings::default(),
            geometry: GeometrySettings::default(),
            noise: None,
            scenario: ScenarioSection::default(),
            ramsey: RamseyOptions::default(),
            parity_scan: ParityScanOptions::default(),
            sideband_shift: SidebandShiftOptions::default(),
            random_phase: RandomPhaseOptions::default(),
            stability: StabilityOptions::default(),
            alignment: AlignmentOptions::default(),
        }
    }
}

fn line_column(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
    (line, column)
}

impl RunConfig {
    pub fn from_toml(source: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(source).map_err(|e| {
            let (line, column) = match e.span() {
                Some(span) => {
                    let (l, c) = line_column(source, span.start);
                    (Some(l), Some(c))
                }
                None => (None, None),
            };
            ConfigError::Parse { message: e.message().to_string(), line, column }
        })?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(config.schema_version));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let source = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&source)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &str, reason: String| ConfigError::Invalid { field: field.to_string(), reason };
        self.planner.validate().map_err(|e| invalid("planner", e.to_string()))?;
        let c = &self.chain;
        for (field, v) in [
            ("chain.master_frequency", c.master_frequency),
            ("chain.aom_b_center", c.aom_b_center),
            ("chain.aom_b_bandwidth", c.aom_b_bandwidth),
            ("chain.aom_a_bandwidth", c.aom_a_bandwidth),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(field, format!("must be positive, got {v}")));
            }
        }
        DriftProfile::new(c.drift.times().to_vec(), c.drift.offsets().to_vec())
            .map_err(|e| invalid("chain.drift", e.to_string()))?;
        if !(self.geometry.wavelength > 0.0 && self.geometry.wavelength.is_finite()) {
            return Err(invalid("geometry.wavelength", format!("must be positive, got {}", self.geometry.wavelength)));
        }
        self.scenario_config().validate().map_err(|e| invalid("scenario", e.to_string()))?;
        Ok(())
    }

    pub fn beam_geometry(&self) -> BeamGeometry {
        let g = &self.geometry;
        BeamGeometry { geometry: g.kind, delta_k: TAU / g.wavelength, positions: g.positions, misalignment: g.misalignment }
    }

    /// The resolved scenario configuration, scenario defaults filled in.
    pub fn scenario_config(&self) -> ScenarioConfig {
        let s = &self.scenario;
        let mut cfg = ScenarioConfig::new(s.id, s.seed);
        if let Some(shots) = s.shots {
            cfg.shots = shots;
        }
        if let Some(sweep) = &s.sweep {
            cfg.sweep = sweep.clone();
        }
        if let Some(noise) = self.noise {
            cfg.noise = noise;
        }
        cfg.geometry = self.beam_geometry();
        cfg.analysis_source = s.analysis_source;
        cfg.analysis_offset = s.analysis_offset;
        cfg.ramsey = self.ramsey;
        cfg.parity_scan = self.parity_scan;
        cfg.sideband_shift = self.sideband_shift;
        cfg.random_phase = self.random_phase;
        cfg.stability = self.stability;
        cfg.alignment = self.alignment.clone();
        cfg
    }

    /// The gate and copropagating plans the chain is built from.
    pub fn selected_plans(&self) -> Result<(GatePlan, CoPropPlan), SetupError> {
        let gates = plan_gate(&self.planner)?;
        let carriers = plan_copropagating(&self.planner)?;
        let c = &self.chain;
        let single = c.preset == Preset::SinglePll;

        let carrier = carriers
            .plans
            .iter()
            .find(|plan| c.p.is_none_or(|p| plan.p == p))
            .copied()
            .ok_or_else(|| infeasible("copropagating", c.p.map(|p| format!("p = {p}")), &carriers.diagnostics))?;
        let gate = gates
            .plans
            .iter()
            .find(|plan| {
                c.n.is_none_or(|n| plan.n == n)
                    && c.m.is_none_or(|m| plan.m == m)
                    && (!single || (plan.n == plan.m && plan.n == carrier.p))
            })
            .copied()
            .ok_or_else(|| {
                let wanted = match (c.n, c.m) {
                    (None, None) if single => Some(format!("n = m = {}", carrier.p)),
                    (None, None) => None,
                    (n, m) => Some(format!("n = {n:?}, m = {m:?}")),
                };
                infeasible("gate", wanted, &gates.diagnostics)
            })?;
        Ok((gate, carrier))
    }

    pub fn preset_params(&self) -> Result<PresetParams, SetupError> {
        let (gate, carrier) = self.selected_plans()?;
        let c = &self.chain;
        Ok(PresetParams {
            master_frequency: c.master_frequency,
            comb: CombSpec {
                rep_rate: self.planner.rep_rate,
                drift: c.drift.clone(),
                teeth: self.planner.teeth,
                phase_offset: c.comb_phase_offset,
            },
            qubit_frequency: self.planner.qubit_frequency,
            gate,
            carrier,
            aom_b: AomSpec { center: c.aom_b_center, bandwidth: c.aom_b_bandwidth },
            aom_a_bandwidth: c.aom_a_bandwidth,
        })
    }

    /// The configured chain, feed-forward set per `chain.feed_forward`.
    pub fn build_chain(&self) -> Result<ChainGraph, SetupError> {
        let chain = build_preset(self.chain.preset, &self.preset_params()?)?;
        Ok(if self.chain.feed_forward { chain } else { chain.with_feed_forward(false) })
    }

    /// Resolves and runs the configured scenario.
    pub fn run(&self) -> Result<RunResult, SetupError> {
        let cfg = self.scenario_config();
        let chain = if cfg.id == ScenarioId::Stability { Some(self.build_chain()?) } else { None };
        Ok(crate::experiments::run_scenario(&cfg, chain.as_ref())?)
    }
}

fn infeasible(what: &str, wanted: Option<String>, diagnostics: &[String]) -> SetupError {
    let mut notes = vec![match wanted {
        Some(w) => format!("no {what} plan with {w}"),
        None => format!("no {what} plan"),
    }];
    notes.extend(diagnostics.iter().cloned());
    SetupError::Infeasible(notes)
}
