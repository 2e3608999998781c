use serde::{Deserialize, Serialize};

use super::ExperimentError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub fidelity: f64,
    /// `P00 + P11` after the gate.
    pub populations: f64,
    pub parity_amplitude: f64,
}

/// Bell-state fidelity `½(P00 + P11) + ½A`.
///
/// Both the even-parity population and the parity amplitude carry the
/// factor `(1 − thermal)(1 − detection)`: a thermally excited gate leaves the
/// wrong population and coherence, and a readout flip moves a shot out of the
/// even-parity bins as well as out of the fringe.
pub fn error_budget(thermal: f64, detection: f64) -> Result<FidelityEstimate, ExperimentError> {
    for (name, v) in [("thermal", thermal), ("detection", detection)] {
        if !(0.0..=0.5).contains(&v) {
            return Err(ExperimentError::InvalidConfig(format!("{name} error {v} outside [0, 0.5]")));
        }
    }
    let keep = (1.0 - thermal) * (1.0 - detection);
    Ok(FidelityEstimate { fidelity: 0.5 * keep + 0.5 * keep, populations: keep, parity_amplitude: keep })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_typical() {
        assert_eq!(error_budget(0.0, 0.0).unwrap().fidelity, 1.0);
        let f = error_budget(0.08, 0.05).unwrap();
        assert!((0.85..=0.88).contains(&f.fidelity), "{}", f.fidelity);
        assert!((f.parity_amplitude - 0.874).abs() < 1e-12);
        assert!(error_budget(0.6, 0.0).is_err());
        assert!(error_budget(0.0, -0.1).is_err());
    }
}
