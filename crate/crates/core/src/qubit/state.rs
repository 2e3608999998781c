use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::QubitError;

/// Allowed deviation of `|ψ|²` from one for a state to count as normalised.
pub const NORM_TOLERANCE: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pure two-qubit amplitudes in the order |00⟩, |01⟩, |10⟩, |11⟩ (qubit 1 is
/// the left label), plus a contrast `C` describing a classical mixture
/// `C·|ψ⟩⟨ψ| + (1 − C)·𝟙/4`. Unitaries act on `|ψ⟩` only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitState {
    amps: [Complex64; 4],
    contrast: f64,
}

impl TwoQubitState {
    pub fn new(amps: [Complex64; 4]) -> Result<Self, QubitError> {
        let state = Self { amps, contrast: 1.0 };
        state.check_normalized()?;
        Ok(state)
    }

    /// Normalises `amps`; `None` for the zero vector.
    pub fn normalized(amps: [Complex64; 4]) -> Option<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        (norm > 0.0 && norm.is_finite()).then(|| Self { amps: amps.map(|a| a / norm), contrast: 1.0 })
    }

    pub fn ground() -> Self {
        Self::basis(0)
    }

    /// Computational basis state `index` (0..4).
    pub fn basis(index: usize) -> Self {
        let mut amps = [Complex64::new(0.0, 0.0); 4];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps, contrast: 1.0 }
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amps
    }

    pub fn contrast(&self) -> f64 {
        self.contrast
    }

    pub fn with_contrast(mut self, contrast: f64) -> Result<Self, QubitError> {
        check_contrast(contrast)?;
        self.contrast = contrast;
        Ok(self)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_normalized(&self) -> Result<(), QubitError> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE || !n.is_finite() {
            return Err(QubitError::NotNormalized(n));
        }
        Ok(())
    }

    /// Outcome probabilities of the mixed state, same order as the amplitudes.
    pub fn probabilities(&self) -> [f64; 4] {
        let c = self.contrast;
        self.amps.map(|a| c * a.norm_sqr() + (1.0 - c) / 4.0)
    }

    /// `P00 + P11 − P01 − P10`.
    pub fn parity(&self) -> f64 {
        let p = self.probabilities();
        p[0] + p[3] - p[1] - p[2]
    }

    /// Probability of reading `|1⟩` on `qubit`.
    pub fn prob_one(&self, qubit: u8) -> Result<f64, QubitError> {
        let p = self.probabilities();
        match qubit {
            1 => Ok(p[2] + p[3]),
            2 => Ok(p[1] + p[3]),
            q => Err(QubitError::InvalidQubit(q)),
        }
    }

    /// Carrier rotation `R(θ, φ) = cos(θ/2)·𝟙 − i sin(θ/2)(cos φ σx + sin φ σy)`
    /// on `qubit`.
    pub fn rotate(&self, qubit: u8, theta: f64, phi: f64) -> Result<Self, QubitError> {
        self.check_normalized()?;
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let off_lower = -I * Complex64::from_polar(s, phi); // ⟨1|R|0⟩
        let off_upper = -I * Complex64::from_polar(s, -phi); // ⟨0|R|1⟩
        // index pairs (|…0…⟩, |…1…⟩) for the addressed qubit
        let pairs: [(usize, usize); 2] = match qubit {
            1 => [(0, 2), (1, 3)],
            2 => [(0, 1), (2, 3)],
            q => return Err(QubitError::InvalidQubit(q)),
        };
        let mut amps = self.amps;
        for (i0, i1) in pairs {
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            amps[i0] = a0 * c + off_upper * a1;
            amps[i1] = off_lower * a0 + a1 * c;
        }
        Ok(Self { amps, contrast: self.contrast })
    }

    /// Mølmer–Sørensen map at gate completion:
    ///
    /// ```text
    /// |00⟩ → (|00⟩ − i e^{−iφG}|11⟩)/√2     |01⟩ → (|01⟩ − i|10⟩)/√2
    /// |11⟩ → (|11⟩ − i e^{+iφG}|00⟩)/√2     |10⟩ → (|10⟩ − i|01⟩)/√2
    /// ```
    ///
    /// `contrast` multiplies the state's recorded contrast.
    pub fn ms_gate(&self, phi_g: f64, contrast: f64) -> Result<Self, QubitError> {
        self.check_normalized()?;
        check_contrast(contrast)?;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let [a00, a01, a10, a11] = self.amps;
        let down = -I * Complex64::from_polar(1.0, -phi_g);
        let up = -I * Complex64::from_polar(1.0, phi_g);
        let amps = [
            (a00 + up * a11) * r,
            (a01 - I * a10) * r,
            (a10 - I * a01) * r,
            (a11 + down * a00) * r,
        ];
        Ok(Self { amps, contrast: self.contrast * contrast })
    }
}

fn check_contrast(c: f64) -> Result<(), QubitError> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(QubitError::InvalidContrast(c))
    }
}

pub fn rotate(state: &TwoQubitState, qubit: u8, theta: f64, phi: f64) -> Result<TwoQubitState, QubitError> {
    state.rotate(qubit, theta, phi)
}

pub fn ms_gate(state: &TwoQubitState, phi_g: f64, contrast: f64) -> Result<TwoQubitState, QubitError> {
    state.ms_gate(phi_g, contrast)
}

pub fn parity(state: &TwoQubitState) -> f64 {
    state.parity()
}
