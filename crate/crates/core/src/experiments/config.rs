use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;

use super::ExperimentError;
use crate::qubit::{BeamGeometry, Geometry};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    Ramsey,
    #[default]
    ParityScan,
    SidebandShift,
    RandomPhase,
    Stability,
    Alignment,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::Ramsey,
        ScenarioId::ParityScan,
        ScenarioId::SidebandShift,
        ScenarioId::RandomPhase,
        ScenarioId::Stability,
        ScenarioId::Alignment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::Ramsey => "ramsey",
            ScenarioId::ParityScan => "parity_scan",
            ScenarioId::SidebandShift => "sideband_shift",
            ScenarioId::RandomPhase => "random_phase",
            ScenarioId::Stability => "stability",
            ScenarioId::Alignment => "alignment",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioId::Ramsey => "Raman/microwave Ramsey fringe and coherence decay",
            ScenarioId::ParityScan => "parity of the entangled state against analysis phase",
            ScenarioId::SidebandShift => "gate phase response to a red or blue sideband phase step",
            ScenarioId::RandomPhase => "parity contrast under random optical path jumps",
            ScenarioId::Stability => "fringe phase over a day of slow drifts",
            ScenarioId::Alignment => "ion brightness against shuttle distance for wave-front tilts",
        }
    }

    /// Sweep variables this scenario accepts; the first is the default.
    pub fn sweep_names(self) -> &'static [&'static str] {
        match self {
            ScenarioId::Ramsey => &["delay", "raman_phase"],
            ScenarioId::ParityScan | ScenarioId::RandomPhase => &["analysis_phase"],
            ScenarioId::SidebandShift => &["sideband_phase"],
            ScenarioId::Stability => &["time"],
            ScenarioId::Alignment => &["distance"],
        }
    }

    pub fn default_sweep(self) -> Sweep {
        let (start, stop, points) = match self {
            ScenarioId::Ramsey => (0.0, 4.0, 20),
            ScenarioId::ParityScan | ScenarioId::RandomPhase => (0.0, TAU, 24),
            ScenarioId::SidebandShift => (0.0, PI, 11),
            ScenarioId::Stability => (0.0, 86_400.0, 49),
            ScenarioId::Alignment => (0.0, 20e-6, 101),
        };
        Sweep { name: self.sweep_names()[0].to_string(), start, stop, points }
    }

    pub fn default_shots(self) -> u32 {
        match self {
            ScenarioId::SidebandShift => 300,
            _ => 500,
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Evenly spaced sweep, endpoints included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start + step * i as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisSource {
    #[default]
    Microwave,
    Raman,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// 1/e coherence time τ, s. `inf` disables dephasing.
    pub dephasing_time: f64,
    /// Path-drift random walk, m/√s.
    pub path_drift_step: f64,
    /// Repetition-rate random walk, Hz/√s.
    pub rep_rate_drift_step: f64,
    /// Per-qubit readout flip probability.
    pub detection_error: f64,
    /// Parity contrast of the gate.
    pub contrast: f64,
    /// `false` replaces sampled shots with exact expectations.
    pub shot_noise: bool,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            dephasing_time: 1.8,
            path_drift_step: 0.5e-6 / 60.0,
            rep_rate_drift_step: 10.0 / 60.0,
            detection_error: 0.0,
            contrast: 1.0,
            shot_noise: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RamseyOptions {
    /// Phase of the first (Raman) pulse in a delay sweep.
    pub first_phase: f64,
    /// Phase of the second (microwave) pulse in a delay sweep.
    pub second_phase: f64,
    /// Fixed delay for a `raman_phase` sweep, s.
    pub delay: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParityScanOptions {
    pub phi_a: f64,
    pub phi_b_red: f64,
    pub phi_b_blue: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sideband {
    #[default]
    Red,
    Blue,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SidebandShiftOptions {
    pub sideband: Sideband,
    pub analysis_points: usize,
}

impl Default for SidebandShiftOptions {
    fn default() -> Self {
        Self { sideband: Sideband::Red, analysis_points: 24 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomPhaseOptions {
    /// Draw a fresh phase every shot; otherwise once per analysis point.
    pub per_shot: bool,
    /// Jumps are uniform on `[offset, offset + range)`.
    pub range: f64,
    pub offset: f64,
}

impl Default for RandomPhaseOptions {
    fn default() -> Self {
        Self { per_shot: true, range: TAU, offset: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityOptions {
    pub analysis_points: usize,
    /// Sampling interval of the repetition-rate random walk, s.
    pub drift_step_interval: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self { analysis_points: 24, drift_step_interval: 60.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignmentOptions {
    pub angles_deg: Vec<f64>,
}

impl Default for AlignmentOptions {
    fn default() -> Self {
        Self { angles_deg: vec![1.0, 0.05] }
    }
}

/// Everything a scenario run needs apart from the signal chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: ScenarioId,
    pub seed: u64,
    pub shots: u32,
    pub sweep: Sweep,
    pub noise: NoiseSpec,
    pub geometry: BeamGeometry,
    pub analysis_source: AnalysisSource,
    /// Static fringe offset φ' of Raman analysis pulses relative to microwave ones.
    pub analysis_offset: f64,
    pub ramsey: RamseyOptions,
    pub parity_scan: ParityScanOptions,
    pub sideband_shift: SidebandShiftOptions,
    pub random_phase: RandomPhaseOptions,
    pub stability: StabilityOptions,
    pub alignment: AlignmentOptions,
}

impl ScenarioConfig {
    /// Defaults for `id`.
    pub fn new(id: ScenarioId, seed: u64) -> Self {
        let noise = match id {
            ScenarioId::Alignment => NoiseSpec { shot_noise: false, ..NoiseSpec::default() },
            ScenarioId::Stability => NoiseSpec { contrast: 0.87, ..NoiseSpec::default() },
            _ => NoiseSpec::default(),
        };
        Self {
            id,
            seed,
            shots: id.default_shots(),
            sweep: id.default_sweep(),
            noise,
            geometry: BeamGeometry::nominal(Geometry::Insensitive),
            analysis_source: AnalysisSource::Microwave,
            analysis_offset: 0.0,
            ramsey: RamseyOptions::default(),
            parity_scan: ParityScanOptions::default(),
            sideband_shift: SidebandShiftOptions::default(),
            random_phase: RandomPhaseOptions::default(),
            stability: StabilityOptions::default(),
            alignment: AlignmentOptions::default(),
        }
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Self {
        self.geometry.geometry = geometry;
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::InvalidConfig(m));
        let s = &self.sweep;
        if !self.id.sweep_names().contains(&s.name.as_str()) {
            return bad(format!(
                "scenario {} cannot sweep `{}`, expected one of {:?}",
                self.id,
                s.name,
                self.id.sweep_names()
            ));
        }
        if s.points < 2 {
            return bad(format!("sweep needs at least 2 points, got {}", s.points));
        }
        if !(s.start.is_finite() && s.stop.is_finite()) {
            return bad("sweep bounds must be finite".into());
        }
        if self.shots == 0 {
            return bad("shots must be at least 1".into());
        }
        let n = &self.noise;
        for (name, p) in [("detection_error", n.detection_error), ("contrast", n.contrast)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        if !(n.dephasing_time > 0.0) {
            return bad(format!("dephasing_time must be positive, got {}", n.dephasing_time));
        }
        if !(n.path_drift_step >= 0.0 && n.path_drift_step.is_finite()) {
            return bad("path_drift_step must be finite and non-negative".into());
        }
        if !(n.rep_rate_drift_step >= 0.0 && n.rep_rate_drift_step.is_finite()) {
            return bad("rep_rate_drift_step must be finite and non-negative".into());
        }
        self.geometry.validate().map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        if !self.analysis_offset.is_finite() {
            return bad("analysis_offset must be finite".into());
        }
        match self.id {
            ScenarioId::Ramsey => {
                if s.name == "delay" && (s.start < 0.0 || s.stop < 0.0) {
                    return bad("Ramsey delays must be non-negative".into());
                }
                if self.ramsey.delay < 0.0 {
                    return bad("Ramsey delay must be non-negative".into());
                }
            }
            ScenarioId::SidebandShift if self.sideband_shift.analysis_points < 3 => {
                return bad("sideband_shift.analysis_points must be at least 3".into());
            }
            ScenarioId::Stability => {
                if self.stability.analysis_points < 3 {
                    return bad("stability.analysis_points must be at least 3".into());
                }
                if !(self.stability.drift_step_interval > 0.0) {
                    return bad("stability.drift_step_interval must be positive".into());
                }
                if s.start < 0.0 || s.stop <= s.start {
                    return bad("stability times must be increasing from t ≥ 0".into());
                }
            }
            ScenarioId::RandomPhase if !(self.random_phase.range.is_finite() && self.random_phase.range >= 0.0) => {
                return bad("random_phase.range must be finite and non-negative".into());
            }
            ScenarioId::Alignment if self.alignment.angles_deg.is_empty() => {
                return bad("alignment.angles_deg is empty".into());
            }
            _ => {}
        }
        Ok(())
    }

    pub(crate) fn expect(&self, id: ScenarioId) -> Result<(), ExperimentError> {
        if self.id != id {
            return Err(ExperimentError::ConfigMismatch { expected: id, got: self.id });
        }
        self.validate()
    }
}
