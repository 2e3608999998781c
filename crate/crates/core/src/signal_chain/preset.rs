//! The two phase-coherence circuits.
//!
//! Both share the same front end: photodiode harmonics mixed (difference) with
//! the master oscillator, PLLs locked to the resulting beat-notes. Each PLL
//! output is then mixed with an AWG tone so that the AOM B drive carries exactly
//! the drift the ion-side beat-note needs removed.
//!
//! Sum/difference choices per leg follow from the drift polarity. A PLL locked
//! with polarity `s` on tooth `k` carries `s·k·δr`. The red drive `ν_B,r` must
//! carry `+n·δr`, the blue drive `ν_B,b` must carry `−m·δr` and the carrier
//! drive `ν_B,2` must carry `+p·δr`:
//!
//! * same polarity, target below the PLL: difference, PLL first (`ν_B = ν_PLL − ν_AWG`)
//! * same polarity, target above the PLL: sum (`ν_B = ν_PLL + ν_AWG`)
//! * opposite polarity: difference, AWG first (`ν_B = ν_AWG − ν_PLL`)
//!
//! With the nominal plan (`n = 160`, `m = 154`) both gate legs are "PLL
//! first" differences, i.e. `ν_B,r = ν_PLL1 − ν_AWG,r` and `ν_B,b = ν_PLL2 − ν_AWG,b`.
//! Mixing a combined PLL1+PLL2 signal against the AWG pair produces the same
//! tone set as the two per-leg mixers used here; the out-of-band cross terms
//! are removed by the AOM B passband either way.
//!
//! Switch `switch_a` routes the AWG to the microwave (1), carrier (2) or gate
//! (3) branch; `switch_b` picks the AOM B source, gate (1) or carrier (2).
//! The AWG ships with the gate program loaded.

use serde::{Deserialize, Serialize};

use super::graph::{
    BeatSelector, CarrierCoupling, ChainGraph, IonCouplings, MixMode, Node, NodeKind, Route,
    SidebandCoupling,
};
use super::{ChainError, DriftProfile, Preset, Tone, Transition};
use crate::freq_planner::{CoPropPlan, GatePlan};
use crate::{Band, Sign, ToothRange};

/// Tolerance for checking AOM B drives against the plan, Hz.
const PLAN_MATCH_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombSpec {
    pub rep_rate: f64,
    #[serde(default)]
    pub drift: DriftProfile,
    pub teeth: ToothRange,
    #[serde(default)]
    pub phase_offset: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AomSpec {
    pub center: f64,
    pub bandwidth: f64,
}

impl AomSpec {
    pub fn band(&self) -> Band {
        Band::centered(self.center, self.bandwidth)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetParams {
    pub master_frequency: f64,
    pub comb: CombSpec,
    pub qubit_frequency: f64,
    pub gate: GatePlan,
    pub carrier: CoPropPlan,
    pub aom_b: AomSpec,
    /// AOM A is centred on the plan's `ν_A`.
    pub aom_a_bandwidth: f64,
}

struct Leg {
    mode: MixMode,
    awg_first: bool,
    awg: f64,
}

/// Mixer wiring turning a PLL output into `target` carrying `want·k·δr`.
fn feed_forward_leg(node: &str, pll_out: f64, pll_sign: Sign, target: f64, want: Sign) -> Result<Leg, ChainError> {
    let leg = if pll_sign == want {
        if target > pll_out {
            Leg { mode: MixMode::Sum, awg_first: false, awg: target - pll_out }
        } else {
            Leg { mode: MixMode::Difference, awg_first: false, awg: pll_out - target }
        }
    } else {
        Leg { mode: MixMode::Difference, awg_first: true, awg: target + pll_out }
    };
    if leg.awg <= 0.0 {
        return Err(ChainError::ConstraintViolation {
            node: node.to_string(),
            reason: format!("needs a non-positive AWG tone ({} Hz)", leg.awg),
        });
    }
    Ok(leg)
}

struct Builder {
    nodes: Vec<Node>,
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn add(&mut self, name: &str, kind: NodeKind) -> usize {
        self.nodes.push(Node::new(name, kind));
        self.nodes.len() - 1
    }

    fn wire(&mut self, from: usize, to: usize) {
        self.edges.push((from, to));
    }

    fn mixer(&mut self, name: &str, mode: MixMode, passband: Band, first: usize, second: usize) -> usize {
        let id = self.add(name, NodeKind::Mixer { mode, passband });
        self.wire(first, id);
        self.wire(second, id);
        id
    }

    fn pll(&mut self, name: &str, beat: f64, capture: f64, input: usize) -> usize {
        let id = self.add(
            name,
            NodeKind::Pll {
                lock: BeatSelector { target: beat.abs(), capture },
                sign: Sign::of(beat),
                feed_forward: true,
                phase_noise: None,
            },
        );
        self.wire(input, id);
        id
    }

    fn leg(&mut self, name: &str, leg: &Leg, pll: usize, awg_tee: usize, passband: Band) -> usize {
        let (a, b) = if leg.awg_first { (awg_tee, pll) } else { (pll, awg_tee) };
        self.mixer(name, leg.mode, passband, a, b)
    }
}

/// Builds one of the two phase-coherence circuits from a gate plan and a
/// copropagating plan.
///
/// The returned chain is configured for the gate (switch a → 3, switch b → 1).
pub fn build_preset(preset: Preset, params: &PresetParams) -> Result<ChainGraph, ChainError> {
    let PresetParams { master_frequency: mo_f, comb, qubit_frequency, gate, carrier, aom_b, aom_a_bandwidth } =
        params;
    let rate = comb.rep_rate;
    let b_band = aom_b.band();

    for (what, f) in [
        ("red drive", gate.aom_b_red),
        ("blue drive", gate.aom_b_blue),
        ("carrier drive 1", carrier.aom_b_first),
        ("carrier drive 2", carrier.aom_b_second),
    ] {
        if !b_band.contains(f) {
            return Err(ChainError::ConstraintViolation {
                node: "aom_b".into(),
                reason: format!("planned {what} {f} Hz outside {b_band}"),
            });
        }
    }
    for (tooth, what) in [(gate.n, "n"), (gate.m, "m"), (carrier.p, "p")] {
        if !comb.teeth.contains(tooth) {
            return Err(ChainError::ConstraintViolation {
                node: "comb".into(),
                reason: format!("tooth {what} = {tooth} outside {}..={}", comb.teeth.lo, comb.teeth.hi),
            });
        }
    }
    if preset == Preset::SinglePll && !(gate.n == gate.m && gate.m == carrier.p) {
        return Err(ChainError::ConstraintViolation {
            node: "pll".into(),
            reason: format!(
                "single PLL needs one comb tooth solution, got n = {}, m = {}, p = {}",
                gate.n, gate.m, carrier.p
            ),
        });
    }

    let beat = |k: i64| k as f64 * rate - mo_f;
    for (k, name) in [(gate.n, "n"), (gate.m, "m"), (carrier.p, "p")] {
        if beat(k) == 0.0 {
            return Err(ChainError::ConstraintViolation {
                node: "mixer1".into(),
                reason: format!("tooth {name} = {k} sits on the master oscillator, no beat-note to lock"),
            });
        }
    }
    let capture = rate / 4.0;
    let max_beat = [gate.n, gate.m, carrier.p].iter().map(|&k| beat(k).abs()).fold(0.0, f64::max);

    let mut b = Builder { nodes: Vec::new(), edges: Vec::new() };
    let mo = b.add("mo", NodeKind::MasterOscillator { frequency: *mo_f, phase: 0.0 });
    let comb_id = b.add(
        "comb",
        NodeKind::CombSource {
            rep_rate: rate,
            drift: comb.drift.clone(),
            teeth: comb.teeth,
            phase_offset: comb.phase_offset,
        },
    );
    let mixer1 = b.mixer("mixer1", MixMode::Difference, Band::new(0.0, max_beat + rate / 2.0), comb_id, mo);

    let (pll_red, pll_blue, pll_carrier) = match preset {
        Preset::ThreePll => (
            b.pll("pll1", beat(gate.n), capture, mixer1),
            b.pll("pll2", beat(gate.m), capture, mixer1),
            b.pll("pll3", beat(carrier.p), capture, mixer1),
        ),
        Preset::SinglePll => {
            let p = b.pll("pll", beat(gate.n), capture, mixer1);
            (p, p, p)
        }
    };
    let pll_names = match preset {
        Preset::ThreePll => ["pll1", "pll2", "pll3"],
        Preset::SinglePll => ["pll", "pll", "pll"],
    };

    let red_leg = feed_forward_leg(pll_names[0], beat(gate.n).abs(), Sign::of(beat(gate.n)), gate.aom_b_red, Sign::Plus)?;
    let blue_leg =
        feed_forward_leg(pll_names[1], beat(gate.m).abs(), Sign::of(beat(gate.m)), gate.aom_b_blue, Sign::Minus)?;
    let carrier_leg = feed_forward_leg(
        pll_names[2],
        beat(carrier.p).abs(),
        Sign::of(beat(carrier.p)),
        carrier.aom_b_second,
        Sign::Plus,
    )?;
    let mw_offset = qubit_frequency - mo_f;
    if mw_offset == 0.0 {
        return Err(ChainError::ConstraintViolation {
            node: "mixer_mw".into(),
            reason: "master oscillator already at the qubit frequency".into(),
        });
    }

    let gate_program = vec![Tone::at(red_leg.awg), Tone::at(blue_leg.awg)];
    let carrier_program = vec![Tone::at(carrier_leg.awg), Tone::at(carrier.aom_b_first)];
    let microwave_program = vec![Tone::at(mw_offset.abs())];

    let awg = b.add("awg", NodeKind::Awg { tones: gate_program.clone() });
    let switch_a = b.add("switch_a", NodeKind::Switch { position: 3 });
    b.wire(awg, switch_a);
    let tee_mw = b.add("tee_microwave", NodeKind::Combiner);
    let tee_carrier = b.add("tee_carrier", NodeKind::Combiner);
    let tee_gate = b.add("tee_gate", NodeKind::Combiner);
    b.wire(switch_a, tee_mw);
    b.wire(switch_a, tee_carrier);
    b.wire(switch_a, tee_gate);

    let mw_band = Band::centered(*qubit_frequency, rate);
    let mw_mode = if mw_offset > 0.0 { MixMode::Sum } else { MixMode::Difference };
    b.mixer("mixer_mw", mw_mode, mw_band, mo, tee_mw);

    let mixer_red = b.leg("mixer_red", &red_leg, pll_red, tee_gate, b_band);
    let mixer_blue = b.leg("mixer_blue", &blue_leg, pll_blue, tee_gate, b_band);
    let gate_combiner = b.add("gate_combiner", NodeKind::Combiner);
    b.wire(mixer_red, gate_combiner);
    b.wire(mixer_blue, gate_combiner);

    let mixer_carrier = b.leg("mixer_carrier", &carrier_leg, pll_carrier, tee_carrier, b_band);
    let filter_carrier = b.add("filter_carrier", NodeKind::Filter { passband: b_band });
    b.wire(tee_carrier, filter_carrier);
    let carrier_combiner = b.add("carrier_combiner", NodeKind::Combiner);
    b.wire(mixer_carrier, carrier_combiner);
    b.wire(filter_carrier, carrier_combiner);

    let switch_b = b.add("switch_b", NodeKind::Switch { position: 1 });
    b.wire(gate_combiner, switch_b);
    b.wire(carrier_combiner, switch_b);
    let aom_b_id = b.add(
        "aom_b",
        NodeKind::Aom { center: aom_b.center, bandwidth: aom_b.bandwidth, diffraction_sign: Sign::Plus, drive: vec![] },
    );
    b.wire(switch_b, aom_b_id);
    // The red resonance line carries `−s_A·ν_A`, so the optical shift is `−s_A·ν_A`.
    b.add(
        "aom_a",
        NodeKind::Aom {
            center: gate.aom_a,
            bandwidth: *aom_a_bandwidth,
            diffraction_sign: gate.s_a.flip(),
            drive: vec![Tone::at(gate.aom_a)],
        },
    );

    let couplings = IonCouplings {
        comb: "comb".into(),
        aom_a: "aom_a".into(),
        aom_b: "aom_b".into(),
        awg: "awg".into(),
        microwave: "mixer_mw".into(),
        red: SidebandCoupling { tooth: gate.n, aom_b_nominal: gate.aom_b_red },
        blue: SidebandCoupling { tooth: gate.m, aom_b_nominal: gate.aom_b_blue },
        carrier: CarrierCoupling {
            tooth: carrier.p,
            aom_b_first: carrier.aom_b_first,
            aom_b_second: carrier.aom_b_second,
        },
        gate_route: Route {
            switches: vec![("switch_a".into(), 3), ("switch_b".into(), 1)],
            awg_tones: gate_program,
        },
        carrier_route: Route {
            switches: vec![("switch_a".into(), 2), ("switch_b".into(), 2)],
            awg_tones: carrier_program,
        },
        microwave_route: Route { switches: vec![("switch_a".into(), 1)], awg_tones: microwave_program },
    };

    let chain = ChainGraph::new(b.nodes, b.edges)?.with_preset(preset).with_couplings(couplings)?;
    check_routes(&chain, params)?;
    Ok(chain)
}

/// Every route must deliver exactly the planned drives, with no spurs.
fn check_routes(chain: &ChainGraph, params: &PresetParams) -> Result<(), ChainError> {
    let quiet = chain.with_drift(DriftProfile::none());
    let expect = |got: &[Tone], want: &[f64], node: &str| -> Result<(), ChainError> {
        let mut got: Vec<f64> = got.iter().map(|t| t.frequency).collect();
        let mut want = want.to_vec();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        let ok = got.len() == want.len() && got.iter().zip(&want).all(|(g, w)| (g - w).abs() < PLAN_MATCH_TOL);
        if ok {
            Ok(())
        } else {
            Err(ChainError::ConstraintViolation {
                node: node.to_string(),
                reason: format!("delivers {got:?} Hz, plan needs {want:?} Hz"),
            })
        }
    };

    let gate = quiet.configured_for(Transition::RedSideband)?.propagate(0.0)?;
    expect(gate.get("aom_b").unwrap_or_default(), &[params.gate.aom_b_red, params.gate.aom_b_blue], "aom_b")?;

    let carrier = quiet.configured_for(Transition::CarrierCopropagating)?.propagate(0.0)?;
    expect(
        carrier.get("aom_b").unwrap_or_default(),
        &[params.carrier.aom_b_first, params.carrier.aom_b_second],
        "aom_b",
    )?;

    let mw = quiet.configured_for(Transition::Microwave)?.propagate(0.0)?;
    expect(mw.get("mixer_mw").unwrap_or_default(), &[params.qubit_frequency], "mixer_mw")?;
    Ok(())
}
