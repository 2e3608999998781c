//! Beat-notes at the ion.

use super::graph::{comb_tooth, ChainGraph, NodeKind};
use super::{ChainError, DriftProfile, Tone, Transition};

/// Repetition-rate step used for the finite-difference drift coefficient, Hz.
const DRIFT_STEP: f64 = 1e3;

impl ChainGraph {
    /// Copy with switches and AWG program set for `transition`.
    pub fn configured_for(&self, transition: Transition) -> Result<ChainGraph, ChainError> {
        let couplings = self.couplings().ok_or(ChainError::NotCoupled)?;
        let route = couplings.route(transition).clone();
        let awg = couplings.awg.clone();
        let mut next = self.with_awg_tones(&awg, route.awg_tones)?;
        for (switch, position) in &route.switches {
            next = next.with_switch(switch, *position)?;
        }
        Ok(next)
    }

    fn check_route(&self, transition: Transition) -> Result<(), ChainError> {
        let couplings = self.couplings().ok_or(ChainError::NotCoupled)?;
        let route = couplings.route(transition);
        for (switch, want) in &route.switches {
            match self.node(switch).map(|n| &n.kind) {
                Some(NodeKind::Switch { position }) if position == want => {}
                Some(NodeKind::Switch { position }) => {
                    return Err(ChainError::Configuration {
                        transition,
                        reason: format!("switch `{switch}` at {position}, needs {want}"),
                    })
                }
                _ => return Err(ChainError::UnknownNode(switch.clone())),
            }
        }
        // Phases on the AWG are free; the program's frequencies are not.
        let loaded = match self.node(&couplings.awg).map(|n| &n.kind) {
            Some(NodeKind::Awg { tones }) => tones,
            _ => return Err(ChainError::UnknownNode(couplings.awg.clone())),
        };
        let same = loaded.len() == route.awg_tones.len()
            && loaded.iter().zip(&route.awg_tones).all(|(a, b)| a.frequency == b.frequency);
        if !same {
            return Err(ChainError::Configuration {
                transition,
                reason: format!("AWG `{}` holds a different program", couplings.awg),
            });
        }
        Ok(())
    }

    /// Beat-note (frequency, phase) driving `transition` at time `t`.
    ///
    /// Sideband and carrier beats combine comb teeth with the AOM shifts, each
    /// AOM contributing `diffraction_sign ×` its drive tone:
    ///
    /// * red: tooth `n` through AOM A against tooth 0 through the `ν_B,r` drive
    /// * blue: tooth `m` through the `ν_B,b` drive against tooth 0 through AOM A
    /// * carrier: tooth `p` through `ν_B,1` against tooth 0 through `ν_B,2`
    /// * microwave: the tone delivered to the horn
    pub fn effective_drive(&self, t: f64, transition: Transition) -> Result<Tone, ChainError> {
        self.check_route(transition)?;
        let c = self.couplings().ok_or(ChainError::NotCoupled)?;
        let prop = self.propagate(t)?;

        if transition == Transition::Microwave {
            return prop
                .get(&c.microwave)
                .and_then(|tones| tones.first().copied())
                .ok_or_else(|| ChainError::Configuration { transition, reason: "no microwave tone".into() });
        }

        let comb = &self.node(&c.comb).ok_or_else(|| ChainError::UnknownNode(c.comb.clone()))?.kind;
        let reference = comb_tooth(comb, 0, t)?;
        let sign_of = |name: &str| match self.node(name).map(|n| &n.kind) {
            Some(NodeKind::Aom { diffraction_sign, .. }) => Ok(diffraction_sign.value()),
            _ => Err(ChainError::UnknownNode(name.to_string())),
        };
        let (sign_a, sign_b) = (sign_of(&c.aom_a)?, sign_of(&c.aom_b)?);
        let aom_tone = |name: &str, nominal: f64| -> Result<Tone, ChainError> {
            prop.get(name)
                .and_then(|tones| {
                    tones
                        .iter()
                        .min_by(|x, y| (x.frequency - nominal).abs().total_cmp(&(y.frequency - nominal).abs()))
                        .copied()
                })
                .ok_or_else(|| ChainError::Configuration { transition, reason: format!("`{name}` is not driven") })
        };
        let drive_a = || -> Result<Tone, ChainError> {
            prop.get(&c.aom_a)
                .and_then(|t| t.first().copied())
                .map(|t| t.scaled(sign_a))
                .ok_or_else(|| ChainError::Configuration { transition, reason: "AOM A is not driven".into() })
        };

        Ok(match transition {
            Transition::RedSideband => {
                let tooth = comb_tooth(comb, c.red.tooth, t)?;
                let b = aom_tone(&c.aom_b, c.red.aom_b_nominal)?.scaled(sign_b);
                tooth.sum(drive_a()?).difference(reference.sum(b))
            }
            Transition::BlueSideband => {
                let tooth = comb_tooth(comb, c.blue.tooth, t)?;
                let b = aom_tone(&c.aom_b, c.blue.aom_b_nominal)?.scaled(sign_b);
                tooth.sum(b).difference(reference.sum(drive_a()?))
            }
            Transition::CarrierCopropagating => {
                let tooth = comb_tooth(comb, c.carrier.tooth, t)?;
                let first = aom_tone(&c.aom_b, c.carrier.aom_b_first)?.scaled(sign_b);
                let second = aom_tone(&c.aom_b, c.carrier.aom_b_second)?.scaled(sign_b);
                tooth.sum(first).difference(reference.sum(second))
            }
            Transition::Microwave => unreachable!(),
        })
    }

    /// ∂(beat frequency)/∂δr for `transition`, by finite perturbation of a
    /// constant repetition-rate offset. The chain is configured for the
    /// transition first.
    pub fn drift_sensitivity(&self, transition: Transition) -> Result<f64, ChainError> {
        let configured = self.configured_for(transition)?;
        let base = configured.with_drift(DriftProfile::none()).effective_drive(0.0, transition)?;
        let pushed = configured.with_drift(DriftProfile::constant(DRIFT_STEP)).effective_drive(0.0, transition)?;
        Ok((pushed.frequency - base.frequency) / DRIFT_STEP)
    }
}
