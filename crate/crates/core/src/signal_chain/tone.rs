use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::ChainError;

/// A single spectral component: frequency in Hz and unwrapped phase in rad.
///
/// Phases are excess phases relative to the component's nominal (drift-free)
/// carrier, so a source running exactly at its nominal frequency has a constant
/// phase. A negative frequency is the conjugate of the same real signal; mixers
/// keep signed arithmetic so lock polarities survive propagation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub frequency: f64,
    pub phase: f64,
}

impl Tone {
    pub const fn new(frequency: f64, phase: f64) -> Self {
        Self { frequency, phase }
    }

    pub const fn at(frequency: f64) -> Self {
        Self::new(frequency, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.frequency.is_finite() && self.phase.is_finite()
    }

    pub fn sum(self, other: Tone) -> Tone {
        Tone::new(self.frequency + other.frequency, self.phase + other.phase)
    }

    pub fn difference(self, other: Tone) -> Tone {
        Tone::new(self.frequency - other.frequency, self.phase - other.phase)
    }

    pub fn scaled(self, s: f64) -> Tone {
        Tone::new(s * self.frequency, s * self.phase)
    }

    /// Same real signal with a non-negative frequency.
    pub fn folded(self) -> Tone {
        if self.frequency < 0.0 {
            self.scaled(-1.0)
        } else {
            self
        }
    }

    pub fn wrapped_phase(&self) -> f64 {
        crate::wrap_phase(self.phase)
    }
}

/// Piecewise-constant repetition-rate offset δr(t).
///
/// `offsets[i]` holds on `[times[i], times[i+1])`, the last value holds forever
/// and δr is zero before `times[0]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftProfile {
    times: Vec<f64>,
    offsets: Vec<f64>,
}

impl DriftProfile {
    pub fn new(times: Vec<f64>, offsets: Vec<f64>) -> Result<Self, ChainError> {
        if times.len() != offsets.len() {
            return Err(ChainError::InvalidDrift(format!(
                "{} sample times but {} offsets",
                times.len(),
                offsets.len()
            )));
        }
        if times.iter().chain(&offsets).any(|x| !x.is_finite()) {
            return Err(ChainError::InvalidDrift("non-finite drift sample".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ChainError::InvalidDrift(
                "sample times must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, offsets })
    }

    /// No drift.
    pub fn none() -> Self {
        Self::default()
    }

    /// δr ≡ `offset` from t = 0 on.
    pub fn constant(offset: f64) -> Self {
        Self { times: vec![0.0], offsets: vec![offset] }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn is_zero(&self) -> bool {
        self.offsets.iter().all(|&x| x == 0.0)
    }

    /// δr(t) in Hz.
    pub fn at(&self, t: f64) -> f64 {
        match self.times.partition_point(|&s| s <= t) {
            0 => 0.0,
            i => self.offsets[i - 1],
        }
    }

    /// ∫₀ᵗ δr(τ) dτ in Hz·s, exact for the piecewise-constant profile.
    /// Negative `t` integrates backwards, so the result stays odd in the interval.
    pub fn integral(&self, t: f64) -> f64 {
        if t < 0.0 {
            return -self.integral_between(t, 0.0);
        }
        self.integral_between(0.0, t)
    }

    fn integral_between(&self, a: f64, b: f64) -> f64 {
        let mut acc = 0.0;
        for (i, (&start, &value)) in self.times.iter().zip(&self.offsets).enumerate() {
            let end = self.times.get(i + 1).copied().unwrap_or(f64::INFINITY);
            let lo = start.max(a);
            let hi = end.min(b);
            if hi > lo {
                acc += value * (hi - lo);
            }
        }
        acc
    }
}

/// Additive PLL phase noise, off unless a scenario asks for it.
///
/// Samples are a deterministic function of `(seed, t)` so propagation stays pure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseNoise {
    /// Standard deviation in rad.
    pub rms: f64,
    pub seed: u64,
}

impl PhaseNoise {
    pub fn sample(&self, t: f64) -> f64 {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed ^ t.to_bits());
        let z: f64 = StandardNormal.sample(&mut rng);
        self.rms * z
    }
}

/// Phase accumulated by harmonic `k` of the repetition rate: 2π·k·∫₀ᵗ δr.
pub(crate) fn harmonic_phase(drift: &DriftProfile, k: i64, t: f64) -> f64 {
    TAU * k as f64 * drift.integral(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_is_zero_before_first_sample() {
        let d = DriftProfile::new(vec![1.0, 2.0], vec![5.0, -3.0]).unwrap();
        assert_eq!(d.at(0.5), 0.0);
        assert_eq!(d.at(1.0), 5.0);
        assert_eq!(d.at(1.999), 5.0);
        assert_eq!(d.at(2.0), -3.0);
        assert_eq!(d.at(100.0), -3.0);
    }

    #[test]
    fn drift_integral_closed_form() {
        let d = DriftProfile::new(vec![1.0, 2.0], vec![5.0, -3.0]).unwrap();
        assert_eq!(d.integral(0.5), 0.0);
        assert!((d.integral(1.5) - 2.5).abs() < 1e-12);
        assert!((d.integral(2.0) - 5.0).abs() < 1e-12);
        assert!((d.integral(4.0) - (5.0 - 6.0)).abs() < 1e-12);
        assert_eq!(DriftProfile::constant(100.0).integral(1.0), 100.0);
    }

    #[test]
    fn drift_rejects_unsorted_times() {
        assert!(DriftProfile::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(DriftProfile::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(DriftProfile::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn folding_conjugates() {
        let t = Tone::new(-198e6, 0.25).folded();
        assert_eq!(t, Tone::new(198e6, -0.25));
    }

    #[test]
    fn phase_noise_is_deterministic() {
        let n = PhaseNoise { rms: 0.1, seed: 7 };
        assert_eq!(n.sample(1.5), n.sample(1.5));
        assert_ne!(n.sample(1.5), n.sample(2.5));
    }
}
