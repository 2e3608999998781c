use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

use super::tone::{harmonic_phase, DriftProfile, PhaseNoise, Tone};
use super::{ChainError, Preset, Transition};
use crate::{Band, Sign, ToothRange};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixMode {
    Sum,
    /// First input minus second input, by edge order.
    Difference,
}

/// Beat-note a PLL locks to: the input tone nearest `sign · target`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeatSelector {
    /// Nominal output frequency, Hz (positive).
    pub target: f64,
    /// Maximum distance from the target a tone may sit and still be captured.
    pub capture: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    MasterOscillator {
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Mode-locked laser seen through a fast photodiode: harmonics `k·(νr + δr)`
    /// for every `k ≠ 0` in `teeth`.
    CombSource {
        rep_rate: f64,
        #[serde(default)]
        drift: DriftProfile,
        teeth: ToothRange,
        /// Static optical phase common to every tooth.
        #[serde(default)]
        phase_offset: f64,
    },
    Mixer {
        mode: MixMode,
        passband: Band,
    },
    /// Outputs `sign ×` the selected beat-note. With `feed_forward` off the PLL
    /// free-runs at its nominal target instead.
    Pll {
        lock: BeatSelector,
        sign: Sign,
        #[serde(default = "yes")]
        feed_forward: bool,
        #[serde(default)]
        phase_noise: Option<PhaseNoise>,
    },
    Awg {
        tones: Vec<Tone>,
    },
    /// The optical shift is `diffraction_sign × f` for each drive tone `f`.
    /// Drive tones are the fixed `drive` list plus everything on the inputs.
    Aom {
        center: f64,
        bandwidth: f64,
        diffraction_sign: Sign,
        #[serde(default)]
        drive: Vec<Tone>,
    },
    /// With several inputs: selects input `position` (1-based).
    /// With one input: routes it only along outgoing edge `position`.
    Switch {
        position: u8,
    },
    /// Power combiner (several inputs) or splitter (one input).
    Combiner,
    Filter {
        passband: Band,
    },
}

fn yes() -> bool {
    true
}

impl NodeKind {
    fn label(&self) -> &'static str {
        match self {
            NodeKind::MasterOscillator { .. } => "master oscillator",
            NodeKind::CombSource { .. } => "comb source",
            NodeKind::Mixer { .. } => "mixer",
            NodeKind::Pll { .. } => "PLL",
            NodeKind::Awg { .. } => "AWG",
            NodeKind::Aom { .. } => "AOM",
            NodeKind::Switch { .. } => "switch",
            NodeKind::Combiner => "combiner",
            NodeKind::Filter { .. } => "filter",
        }
    }

    fn is_source(&self) -> bool {
        matches!(
            self,
            NodeKind::MasterOscillator { .. } | NodeKind::CombSource { .. } | NodeKind::Awg { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    #[serde(flatten)]
    pub kind: NodeKind,
}

impl Node {
    pub fn new(name: impl Into<String>, kind: NodeKind) -> Self {
        Self { name: name.into(), kind }
    }
}

/// How a sideband transition uses the chain: comb tooth and the AOM B tone
/// that drives it, identified by its nominal frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandCoupling {
    pub tooth: i64,
    pub aom_b_nominal: f64,
}

/// Copropagating carrier: tooth `p` of AOM B's `ν_B,1` beam against tooth 0 of its `ν_B,2` beam.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarrierCoupling {
    pub tooth: i64,
    pub aom_b_first: f64,
    pub aom_b_second: f64,
}

/// Switch positions and AWG program used for one group of operations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub switches: Vec<(String, u8)>,
    pub awg_tones: Vec<Tone>,
}

/// Everything [`ChainGraph::effective_drive`] needs to know to read a beat-note
/// at the ion out of a propagated chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IonCouplings {
    pub comb: String,
    pub aom_a: String,
    pub aom_b: String,
    pub awg: String,
    /// Node whose output feeds the microwave horn.
    pub microwave: String,
    pub red: SidebandCoupling,
    pub blue: SidebandCoupling,
    pub carrier: CarrierCoupling,
    pub gate_route: Route,
    pub carrier_route: Route,
    pub microwave_route: Route,
}

impl IonCouplings {
    pub fn route(&self, transition: Transition) -> &Route {
        match transition {
            Transition::RedSideband | Transition::BlueSideband => &self.gate_route,
            Transition::CarrierCopropagating => &self.carrier_route,
            Transition::Microwave => &self.microwave_route,
        }
    }
}

/// An acyclic phase-coherence circuit. Immutable once built; every evaluation
/// method takes `&self`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChain", into = "RawChain")]
pub struct ChainGraph {
    nodes: Vec<Node>,
    edges: Vec<(usize, usize)>,
    preset: Option<Preset>,
    couplings: Option<IonCouplings>,
    order: Vec<usize>,
    inputs: Vec<Vec<usize>>,
    outputs: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawChain {
    #[serde(default)]
    preset: Option<Preset>,
    nodes: Vec<Node>,
    edges: Vec<(String, String)>,
    #[serde(default)]
    couplings: Option<IonCouplings>,
}

impl TryFrom<RawChain> for ChainGraph {
    type Error = ChainError;

    fn try_from(raw: RawChain) -> Result<Self, Self::Error> {
        let index = |name: &str| {
            raw.nodes
                .iter()
                .position(|n| n.name == name)
                .ok_or_else(|| ChainError::UnknownNode(name.to_string()))
        };
        let edges = raw
            .edges
            .iter()
            .map(|(a, b)| Ok((index(a)?, index(b)?)))
            .collect::<Result<Vec<_>, ChainError>>()?;
        let mut chain = ChainGraph::new(raw.nodes, edges)?;
        chain.preset = raw.preset;
        if let Some(c) = raw.couplings {
            chain = chain.with_couplings(c)?;
        }
        Ok(chain)
    }
}

impl From<ChainGraph> for RawChain {
    fn from(c: ChainGraph) -> Self {
        let edges = c
            .edges
            .iter()
            .map(|&(a, b)| (c.nodes[a].name.clone(), c.nodes[b].name.clone()))
            .collect();
        RawChain { preset: c.preset, nodes: c.nodes, edges, couplings: c.couplings }
    }
}

/// Output tone lists of every node after one evaluation of the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    names: Vec<String>,
    tones: Vec<Vec<Tone>>,
}

impl Propagation {
    pub fn get(&self, name: &str) -> Option<&[Tone]> {
        self.names.iter().position(|n| n == name).map(|i| self.tones[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Tone])> {
        self.names.iter().map(String::as_str).zip(self.tones.iter().map(Vec::as_slice))
    }

    pub fn into_map(self) -> BTreeMap<String, Vec<Tone>> {
        self.names.into_iter().zip(self.tones).collect()
    }
}

impl ChainGraph {
    /// Validates topology: acyclic, unique names, two inputs per mixer, one per
    /// PLL and filter, none for sources, AOM fixed drives inside the bandwidth.
    pub fn new(nodes: Vec<Node>, edges: Vec<(usize, usize)>) -> Result<Self, ChainError> {
        let n = nodes.len();
        let mut seen = HashSet::new();
        for node in &nodes {
            if !seen.insert(node.name.as_str()) {
                return Err(ChainError::InvalidGraph(format!("duplicate node name `{}`", node.name)));
            }
        }
        let mut inputs = vec![Vec::new(); n];
        let mut outputs = vec![Vec::new(); n];
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(ChainError::InvalidGraph(format!("edge {e} refers to a missing node")));
            }
            if a == b {
                return Err(ChainError::InvalidGraph(format!("self loop on `{}`", nodes[a].name)));
            }
            inputs[b].push(e);
            outputs[a].push(e);
        }

        // Kahn's algorithm, smallest index first for a stable order.
        let mut indegree: Vec<usize> = inputs.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &e in &outputs[i] {
                let to = edges[e].1;
                indegree[to] -= 1;
                if indegree[to] == 0 {
                    ready.insert(to);
                }
            }
        }
        if order.len() != n {
            return Err(ChainError::InvalidGraph("signal graph contains a cycle".into()));
        }

        for (i, node) in nodes.iter().enumerate() {
            let fan_in = inputs[i].len();
            let fan_out = outputs[i].len();
            let bad = |what: String| {
                Err(ChainError::InvalidGraph(format!("{} `{}` {what}", node.kind.label(), node.name)))
            };
            match &node.kind {
                k if k.is_source() && fan_in != 0 => return bad(format!("has {fan_in} inputs, expected none")),
                NodeKind::Mixer { passband, .. } => {
                    if fan_in != 2 {
                        return bad(format!("has {fan_in} inputs, expected exactly two"));
                    }
                    if !passband.is_valid() {
                        return bad("has an invalid passband".into());
                    }
                }
                NodeKind::Pll { lock, .. } => {
                    if fan_in != 1 {
                        return bad(format!("has {fan_in} inputs, expected exactly one"));
                    }
                    if !(lock.target.is_finite() && lock.capture > 0.0) {
                        return bad("has an invalid lock selector".into());
                    }
                }
                NodeKind::Filter { passband } => {
                    if fan_in != 1 {
                        return bad(format!("has {fan_in} inputs, expected exactly one"));
                    }
                    if !passband.is_valid() {
                        return bad("has an invalid passband".into());
                    }
                }
                NodeKind::Switch { position } => {
                    let ports = if fan_in > 1 { fan_in } else { fan_out };
                    if fan_in > 1 && fan_out > 1 {
                        return bad("must have a single input or a single output".into());
                    }
                    if *position == 0 || usize::from(*position) > ports {
                        return bad(format!("position {position} outside 1..={ports}"));
                    }
                }
                NodeKind::Aom { center, bandwidth, drive, .. } => {
                    if !(bandwidth.is_finite() && *bandwidth > 0.0 && center.is_finite()) {
                        return bad("has an invalid bandwidth".into());
                    }
                    let band = Band::centered(*center, *bandwidth);
                    if let Some(t) = drive.iter().find(|t| !band.contains(t.frequency.abs())) {
                        return Err(ChainError::OutOfBand {
                            node: node.name.clone(),
                            frequency: t.frequency,
                            band,
                        });
                    }
                }
                NodeKind::CombSource { rep_rate, teeth, .. } => {
                    if !(rep_rate.is_finite() && *rep_rate > 0.0) || !teeth.is_valid() {
                        return bad("needs a positive repetition rate and a non-empty tooth range".into());
                    }
                }
                _ => {}
            }
        }

        Ok(Self { nodes, edges, preset: None, couplings: None, order, inputs, outputs })
    }

    pub(crate) fn with_preset(mut self, preset: Preset) -> Self {
        self.preset = Some(preset);
        self
    }

    /// Attaches the ion-side reading of the chain, checking that every named node exists.
    pub fn with_couplings(mut self, couplings: IonCouplings) -> Result<Self, ChainError> {
        let mut names = vec![
            &couplings.comb,
            &couplings.aom_a,
            &couplings.aom_b,
            &couplings.awg,
            &couplings.microwave,
        ];
        for route in [&couplings.gate_route, &couplings.carrier_route, &couplings.microwave_route] {
            names.extend(route.switches.iter().map(|(s, _)| s));
        }
        for name in names {
            self.index_of(name)?;
        }
        self.couplings = Some(couplings);
        Ok(self)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn preset(&self) -> Option<Preset> {
        self.preset
    }

    pub fn couplings(&self) -> Option<&IonCouplings> {
        self.couplings.as_ref()
    }

    pub fn node(&self, name: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub(crate) fn index_of(&self, name: &str) -> Result<usize, ChainError> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| ChainError::UnknownNode(name.to_string()))
    }

    pub(crate) fn map_kind(&self, name: &str, f: impl FnOnce(&mut NodeKind)) -> Result<Self, ChainError> {
        let i = self.index_of(name)?;
        let mut next = self.clone();
        f(&mut next.nodes[i].kind);
        // Re-run the structural checks on the edited node set.
        let mut rebuilt = ChainGraph::new(next.nodes, next.edges)?;
        rebuilt.preset = self.preset;
        rebuilt.couplings = self.couplings.clone();
        Ok(rebuilt)
    }

    /// Copy with every PLL's feed-forward switched on or off.
    pub fn with_feed_forward(&self, enabled: bool) -> Self {
        let mut next = self.clone();
        for node in &mut next.nodes {
            if let NodeKind::Pll { feed_forward, .. } = &mut node.kind {
                *feed_forward = enabled;
            }
        }
        next
    }

    /// Copy with the repetition-rate drift of every comb source replaced.
    pub fn with_drift(&self, profile: DriftProfile) -> Self {
        let mut next = self.clone();
        for node in &mut next.nodes {
            if let NodeKind::CombSource { drift, .. } = &mut node.kind {
                *drift = profile.clone();
            }
        }
        next
    }

    /// Copy with one switch moved.
    pub fn with_switch(&self, name: &str, position: u8) -> Result<Self, ChainError> {
        let node = self.node(name).ok_or_else(|| ChainError::UnknownNode(name.to_string()))?;
        if !matches!(node.kind, NodeKind::Switch { .. }) {
            return Err(ChainError::InvalidGraph(format!("`{name}` is not a switch")));
        }
        self.map_kind(name, |k| *k = NodeKind::Switch { position })
    }

    /// Copy with the AWG reprogrammed.
    pub fn with_awg_tones(&self, name: &str, tones: Vec<Tone>) -> Result<Self, ChainError> {
        match self.node(name).map(|n| &n.kind) {
            Some(NodeKind::Awg { .. }) => self.map_kind(name, |k| *k = NodeKind::Awg { tones }),
            Some(_) => Err(ChainError::InvalidGraph(format!("`{name}` is not an AWG"))),
            None => Err(ChainError::UnknownNode(name.to_string())),
        }
    }

    /// Evaluates every node in topological order at time `t`.
    pub fn propagate(&self, t: f64) -> Result<Propagation, ChainError> {
        let mut tones: Vec<Vec<Tone>> = vec![Vec::new(); self.nodes.len()];
        for &i in &self.order {
            let inputs: Vec<Vec<Tone>> = self.inputs[i].iter().map(|&e| self.edge_value(e, &tones)).collect();
            tones[i] = self.evaluate(i, &inputs, t)?;
        }
        Ok(Propagation { names: self.nodes.iter().map(|n| n.name.clone()).collect(), tones })
    }

    fn edge_value(&self, edge: usize, tones: &[Vec<Tone>]) -> Vec<Tone> {
        let from = self.edges[edge].0;
        if let NodeKind::Switch { position } = self.nodes[from].kind {
            if self.inputs[from].len() <= 1 {
                let port = self.outputs[from].iter().position(|&e| e == edge).unwrap_or(usize::MAX);
                if port + 1 != usize::from(position) {
                    return Vec::new();
                }
            }
        }
        tones[from].clone()
    }

    fn evaluate(&self, i: usize, inputs: &[Vec<Tone>], t: f64) -> Result<Vec<Tone>, ChainError> {
        let node = &self.nodes[i];
        Ok(match &node.kind {
            NodeKind::MasterOscillator { frequency, phase } => vec![Tone::new(*frequency, *phase)],
            NodeKind::CombSource { rep_rate, drift, teeth, .. } => {
                let rate = rep_rate + drift.at(t);
                teeth
                    .iter()
                    .filter(|&k| k != 0)
                    .map(|k| Tone::new(k as f64 * rate, harmonic_phase(drift, k, t)))
                    .collect()
            }
            NodeKind::Mixer { mode, passband } => {
                let (a, b) = (&inputs[0], &inputs[1]);
                if a.is_empty() || b.is_empty() {
                    return Ok(Vec::new());
                }
                let out: Vec<Tone> = a
                    .iter()
                    .flat_map(|&x| {
                        b.iter().map(move |&y| match mode {
                            MixMode::Sum => x.sum(y),
                            MixMode::Difference => x.difference(y),
                        })
                    })
                    .filter(|tone| passband.contains(tone.frequency.abs()))
                    .collect();
                if out.is_empty() {
                    return Err(ChainError::EmptyOutput { mixer: node.name.clone() });
                }
                out
            }
            NodeKind::Pll { lock, sign, feed_forward, phase_noise } => {
                let noise = phase_noise.map_or(0.0, |n| n.sample(t));
                if !feed_forward {
                    return Ok(vec![Tone::new(lock.target, noise)]);
                }
                let input = &inputs[0];
                if input.is_empty() {
                    return Ok(Vec::new());
                }
                let s = sign.value();
                let best = input
                    .iter()
                    .map(|tone| (tone, (s * tone.frequency - lock.target).abs()))
                    .filter(|(_, dist)| *dist <= lock.capture)
                    .min_by(|x, y| x.1.total_cmp(&y.1));
                match best {
                    Some((tone, _)) => {
                        let locked = tone.scaled(s);
                        vec![Tone::new(locked.frequency, locked.phase + noise)]
                    }
                    None => return Err(ChainError::Unlocked { pll: node.name.clone(), target: lock.target }),
                }
            }
            NodeKind::Awg { tones } => tones.clone(),
            NodeKind::Aom { center, bandwidth, drive, .. } => {
                let band = Band::centered(*center, *bandwidth);
                let all: Vec<Tone> = drive.iter().chain(inputs.iter().flatten()).map(|t| t.folded()).collect();
                if let Some(t) = all.iter().find(|t| !band.contains(t.frequency)) {
                    return Err(ChainError::OutOfBand { node: node.name.clone(), frequency: t.frequency, band });
                }
                all
            }
            NodeKind::Switch { position } => {
                if inputs.len() > 1 {
                    inputs[usize::from(*position) - 1].clone()
                } else {
                    inputs.first().cloned().unwrap_or_default()
                }
            }
            NodeKind::Combiner => inputs.concat(),
            NodeKind::Filter { passband } => {
                inputs.concat().into_iter().filter(|t| passband.contains(t.frequency.abs())).collect()
            }
        })
    }

    /// Optical comb tooth `k` of the comb source `comb` at time `t`.
    pub fn comb_tooth(&self, comb: &str, k: i64, t: f64) -> Result<Tone, ChainError> {
        let node = self.node(comb).ok_or_else(|| ChainError::UnknownNode(comb.to_string()))?;
        comb_tooth(&node.kind, k, t)
    }
}

/// Tooth `k` of a comb source relative to the reference tooth 0: frequency
/// `k·(νr + δr(t))`, phase `2π·k·∫₀ᵗ δr + offset`.
///
/// Tooth 0 is always addressable; any other `k` must lie in the comb's tooth range.
pub fn comb_tooth(comb: &NodeKind, k: i64, t: f64) -> Result<Tone, ChainError> {
    let NodeKind::CombSource { rep_rate, drift, teeth, phase_offset } = comb else {
        return Err(ChainError::InvalidGraph("comb_tooth needs a comb source".into()));
    };
    if k != 0 && !teeth.contains(k) {
        return Err(ChainError::ToothOutOfRange { tooth: k, range: *teeth });
    }
    Ok(Tone::new(
        k as f64 * (rep_rate + drift.at(t)),
        harmonic_phase(drift, k, t) + phase_offset,
    ))
}
