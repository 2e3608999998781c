//! Sideband, spin, motional and gate phases.
//!
//! For ion `i` at axial position `X_i`:
//!
//! ```text
//! φ_rsb,i = ½(k_r·X_i − Δφ_r)     φ_bsb,i = ½(k_b·X_i − Δφ_b)
//! φ_S,i   = −(φ_rsb,i + φ_bsb,i)  φ_M,i   = φ_rsb,i − φ_bsb,i
//! φ_G     = φ_S,1 + φ_S,2
//! ```
//!
//! `k_r`, `k_b` are the trap-axis projections `±Δk·sin θε` of the two
//! sideband wavevector differences. In the insensitive geometry the red beat
//! is `A − B,r` and the blue beat is `B,b − A`; in the sensitive geometry both
//! beats are `B − A`. A path drift `δx` of the B arm adds `Δk·δx` to both B
//! tones, which cancels in `φ_G` for the insensitive geometry and adds
//! `2Δk·δx` for the sensitive one.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::QubitError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Insensitive,
    Sensitive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    pub geometry: Geometry,
    /// |Δk|, rad/m.
    pub delta_k: f64,
    /// Ion positions along the trap axis, m.
    pub positions: [f64; 2],
    /// θε, rad.
    pub misalignment: f64,
}

impl BeamGeometry {
    pub fn new(geometry: Geometry, delta_k: f64, positions: [f64; 2], misalignment: f64) -> Result<Self, QubitError> {
        let g = Self { geometry, delta_k, positions, misalignment };
        g.validate()?;
        Ok(g)
    }

    /// λ' = 250 nm, ions at ±2.5 µm, no misalignment.
    pub fn nominal(geometry: Geometry) -> Self {
        Self { geometry, delta_k: TAU / 250e-9, positions: [-2.5e-6, 2.5e-6], misalignment: 0.0 }
    }

    pub fn validate(&self) -> Result<(), QubitError> {
        if !(self.delta_k > 0.0 && self.delta_k.is_finite()) {
            return Err(QubitError::InvalidGeometry(format!("Δk must be positive, got {}", self.delta_k)));
        }
        if !self.positions.iter().chain([&self.misalignment]).all(|x| x.is_finite()) {
            return Err(QubitError::InvalidGeometry("positions and θε must be finite".into()));
        }
        Ok(())
    }

    /// λ' = 2π/Δk.
    pub fn effective_wavelength(&self) -> f64 {
        TAU / self.delta_k
    }

    /// Trap-axis projections `(k_r, k_b)`.
    pub fn axial_wavevectors(&self) -> (f64, f64) {
        let axial = self.delta_k * self.misalignment.sin();
        match self.geometry {
            Geometry::Insensitive => (axial, -axial),
            Geometry::Sensitive => (axial, axial),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RfPhases {
    pub phi_a: f64,
    pub phi_b_red: f64,
    pub phi_b_blue: f64,
}

impl RfPhases {
    pub fn new(phi_a: f64, phi_b_red: f64, phi_b_blue: f64) -> Self {
        Self { phi_a, phi_b_red, phi_b_blue }
    }

    /// Tone phases reproducing the given red (`A − B,r`) and blue (`B,b − A`)
    /// beat-note phases, with `φ_A = 0`.
    pub fn from_beat_phases(red: f64, blue: f64) -> Self {
        Self { phi_a: 0.0, phi_b_red: -red, phi_b_blue: blue }
    }

    pub fn is_finite(&self) -> bool {
        self.phi_a.is_finite() && self.phi_b_red.is_finite() && self.phi_b_blue.is_finite()
    }

    /// `(Δφ_r, Δφ_b)` for `geometry`.
    pub fn differences(&self, geometry: Geometry) -> (f64, f64) {
        let blue = self.phi_b_blue - self.phi_a;
        match geometry {
            Geometry::Insensitive => (self.phi_a - self.phi_b_red, blue),
            Geometry::Sensitive => (self.phi_b_red - self.phi_a, blue),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseState {
    /// Path-length change δx of the B arm, m.
    pub path_drift: f64,
    /// Phase offset common to every RF tone, rad.
    pub clock_phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatePhaseSet {
    pub red: [f64; 2],
    pub blue: [f64; 2],
    pub spin: [f64; 2],
    pub motional: [f64; 2],
    pub gate: f64,
}

pub fn sideband_phases(geometry: &BeamGeometry, rf: &RfPhases, noise: &NoiseState) -> GatePhaseSet {
    let drift = geometry.delta_k * noise.path_drift;
    let shifted = RfPhases {
        phi_a: rf.phi_a + noise.clock_phase,
        phi_b_red: rf.phi_b_red + noise.clock_phase + drift,
        phi_b_blue: rf.phi_b_blue + noise.clock_phase + drift,
    };
    let (d_red, d_blue) = shifted.differences(geometry.geometry);
    let (k_r, k_b) = geometry.axial_wavevectors();
    let red = geometry.positions.map(|x| 0.5 * (k_r * x - d_red));
    let blue = geometry.positions.map(|x| 0.5 * (k_b * x - d_blue));
    let spin = [-(red[0] + blue[0]), -(red[1] + blue[1])];
    let motional = [red[0] - blue[0], red[1] - blue[1]];
    GatePhaseSet { red, blue, spin, motional, gate: spin[0] + spin[1] }
}

/// Gate phase at aligned beams with zero ion displacement.
pub fn gate_phase_from_rf(geometry: Geometry, rf: &RfPhases) -> f64 {
    match geometry {
        Geometry::Insensitive => rf.phi_b_blue - rf.phi_b_red,
        Geometry::Sensitive => rf.phi_b_red + rf.phi_b_blue - 2.0 * rf.phi_a,
    }
}
