//! Wave-front tilt between the Raman beams and the trap axis.

use super::QubitError;

/// Ion brightness `cos²(π·d·sin θε / λ')` after shuttling by `d`.
pub fn alignment_signal(d: f64, misalignment: f64, wavelength: f64) -> Result<f64, QubitError> {
    if !(wavelength > 0.0) {
        return Err(QubitError::InvalidGeometry(format!("λ' must be positive, got {wavelength}")));
    }
    Ok((std::f64::consts::PI * d * misalignment.sin() / wavelength).cos().powi(2))
}

/// Motional phase spread `Δk·l·sin θε` along a chain of length `l`.
pub fn misalignment_phase(delta_k: f64, length: f64, misalignment: f64) -> Result<f64, QubitError> {
    if !(length >= 0.0) {
        return Err(QubitError::InvalidGeometry(format!("length must be non-negative, got {length}")));
    }
    Ok(delta_k * length * misalignment.sin())
}

/// Largest θε keeping the phase spread over `length` at or below `phase`.
pub fn max_misalignment_angle(delta_k: f64, length: f64, phase: f64) -> Result<f64, QubitError> {
    let scale = misalignment_phase(delta_k, length, std::f64::consts::FRAC_PI_2)?;
    if !(scale > 0.0) {
        return Err(QubitError::InvalidGeometry("Δk·l must be positive".into()));
    }
    Ok((phase / scale).clamp(-1.0, 1.0).asin())
}
