//! Integer comb-tooth plans for copropagating carriers and two-sideband gates.
//!
//! Copropagating carrier, tooth `p`, both tones on AOM B:
//!
//! ```text
//! ν0 = p·νr + ν_B,1 − ν_B,2
//! ```
//!
//! Entangling gate, teeth `n` (red) and `m` (blue), AOM A order `s_A`:
//!
//! ```text
//! ν0 − να + δ = n·νr − s_A·ν_A − ν_B,r
//! ν0 + να − δ = m·νr + ν_B,b + s_A·ν_A
//! ```
//!
//! Each line fixes its AOM B tone once the tooth is chosen, so the two lines
//! decouple: the feasible teeth per line are an integer interval obtained by
//! inverting the AOM B window, and the gate plans are their product.

use serde::{Deserialize, Serialize};

use crate::{Band, Sign, ToothRange};

/// Largest resonance residual a plan may carry, Hz.
pub const RESIDUAL_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerInput {
    /// ν0, qubit splitting.
    pub qubit_frequency: f64,
    /// να, motional mode.
    pub mode_frequency: f64,
    /// δ, symmetric detuning from the mode.
    pub detuning: f64,
    /// νr.
    pub rep_rate: f64,
    /// Candidate AOM A drive frequencies.
    pub aom_a_candidates: Vec<f64>,
    /// `None` leaves AOM A unconstrained.
    pub aom_a_window: Option<Band>,
    pub aom_b_window: Band,
    pub aom_a_signs: Vec<Sign>,
    pub teeth: ToothRange,
}

impl Default for PlannerInput {
    fn default() -> Self {
        Self::nominal()
    }
}

impl PlannerInput {
    /// The gate configuration with `ν_A = 77.5 MHz`.
    pub fn nominal() -> Self {
        Self {
            qubit_frequency: 12_642.82e6,
            mode_frequency: 2.5e6,
            detuning: 10e3,
            rep_rate: 80.57e6,
            aom_a_candidates: vec![77.5e6],
            aom_a_window: None,
            aom_b_window: Band::new(150e6, 180e6),
            aom_a_signs: vec![Sign::Plus, Sign::Minus],
            teeth: ToothRange::new(100, 200),
        }
    }

    pub fn validate(&self) -> Result<(), PlannerError> {
        let bad = |m: &str| Err(PlannerError::InvalidInput(m.to_string()));
        let finite = [self.qubit_frequency, self.mode_frequency, self.detuning, self.rep_rate];
        if finite.iter().any(|x| !x.is_finite()) {
            return bad("frequencies must be finite");
        }
        if self.qubit_frequency <= 0.0 {
            return bad("qubit_frequency must be positive");
        }
        if self.rep_rate <= 0.0 {
            return bad("rep_rate must be positive");
        }
        if self.detuning < 0.0 {
            return bad("detuning must be non-negative");
        }
        if !self.aom_b_window.is_valid() {
            return bad("aom_b_window is empty");
        }
        if self.aom_a_window.is_some_and(|w| !w.is_valid()) {
            return bad("aom_a_window is empty");
        }
        if self.aom_a_signs.is_empty() {
            return bad("aom_a_signs is empty");
        }
        if self.aom_a_candidates.iter().any(|x| !x.is_finite()) {
            return bad("aom_a_candidates must be finite");
        }
        if !self.teeth.is_valid() {
            return bad("tooth range is empty");
        }
        Ok(())
    }

    /// Right-hand side of the red line, `ν0 − να + δ`.
    pub fn red_target(&self) -> f64 {
        self.qubit_frequency - self.mode_frequency + self.detuning
    }

    /// Right-hand side of the blue line, `ν0 + να − δ`.
    pub fn blue_target(&self) -> f64 {
        self.qubit_frequency + self.mode_frequency - self.detuning
    }

    fn aom_a_allowed(&self, f: f64) -> bool {
        self.aom_a_window.is_none_or(|w| w.contains(f))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlannerError {
    #[error("invalid planner input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatePlan {
    pub n: i64,
    pub m: i64,
    pub s_a: Sign,
    pub aom_a: f64,
    pub aom_b_red: f64,
    pub aom_b_blue: f64,
    pub residual_red: f64,
    pub residual_blue: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoPropPlan {
    pub p: i64,
    pub aom_b_first: f64,
    pub aom_b_second: f64,
    pub residual: f64,
}

/// Search output. `diagnostics` is filled only when `plans` is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanSet<T> {
    pub plans: Vec<T>,
    pub diagnostics: Vec<String>,
}

impl<T> PlanSet<T> {
    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }
}

/// Red AOM B tone for tooth `n`.
pub fn red_tone(input: &PlannerInput, n: i64, s_a: Sign, aom_a: f64) -> f64 {
    n as f64 * input.rep_rate - s_a.value() * aom_a - input.red_target()
}

/// Blue AOM B tone for tooth `m`.
pub fn blue_tone(input: &PlannerInput, m: i64, s_a: Sign, aom_a: f64) -> f64 {
    input.blue_target() - m as f64 * input.rep_rate - s_a.value() * aom_a
}

/// Teeth `k` in `range` with `offset + slope·k·νr` inside `window`.
///
/// The interval inverse is widened by one tooth on each side to absorb
/// rounding, then every candidate is checked with the exact forward predicate.
fn feasible_teeth(
    range: ToothRange,
    window: Band,
    rep_rate: f64,
    tone: impl Fn(i64) -> f64,
    slope: f64,
) -> Vec<i64> {
    // tone(k) = tone(0) + slope·k·νr
    let base = tone(0);
    let (a, b) = ((window.lo - base) / (slope * rep_rate), (window.hi - base) / (slope * rep_rate));
    let (lo, hi) = (a.min(b), a.max(b));
    if !(lo.is_finite() && hi.is_finite()) {
        return Vec::new();
    }
    let lo = (lo.ceil() as i64).saturating_sub(1);
    let hi = (hi.floor() as i64).saturating_add(1);
    match range.clamp(lo, hi) {
        Some(r) => r.iter().filter(|&k| window.contains(tone(k))).collect(),
        None => Vec::new(),
    }
}

fn nearest_tooth(range: ToothRange, ideal: f64) -> i64 {
    (ideal.round() as i64).clamp(range.lo, range.hi)
}

/// Every gate plan satisfying both resonance lines with tones inside the
/// windows, ordered by `|ν_B,r − c| + |ν_B,b − c|` (c = AOM B centre), then
/// `n`, `m`, `s_A` and `ν_A`.
pub fn plan_gate(input: &PlannerInput) -> Result<PlanSet<GatePlan>, PlannerError> {
    input.validate()?;
    let window = input.aom_b_window;
    let mut plans = Vec::new();
    let mut diagnostics = Vec::new();

    for &aom_a in &input.aom_a_candidates {
        if !input.aom_a_allowed(aom_a) {
            diagnostics.push(format!("AOM A candidate {aom_a} Hz outside AOM A window"));
            continue;
        }
        for &s_a in &input.aom_a_signs {
            let red = feasible_teeth(input.teeth, window, input.rep_rate, |n| red_tone(input, n, s_a, aom_a), 1.0);
            let blue = feasible_teeth(input.teeth, window, input.rep_rate, |m| blue_tone(input, m, s_a, aom_a), -1.0);
            if red.is_empty() {
                let n = nearest_tooth(input.teeth, (window.center() + s_a.value() * aom_a + input.red_target()) / input.rep_rate);
                diagnostics.push(format!(
                    "ν_A = {aom_a} Hz, s_A = {s_a}: no red tooth; nearest n = {n} needs ν_B,r = {} Hz",
                    red_tone(input, n, s_a, aom_a)
                ));
            }
            if blue.is_empty() {
                let m = nearest_tooth(input.teeth, (input.blue_target() - s_a.value() * aom_a - window.center()) / input.rep_rate);
                diagnostics.push(format!(
                    "ν_A = {aom_a} Hz, s_A = {s_a}: no blue tooth; nearest m = {m} needs ν_B,b = {} Hz",
                    blue_tone(input, m, s_a, aom_a)
                ));
            }
            for &n in &red {
                for &m in &blue {
                    let aom_b_red = red_tone(input, n, s_a, aom_a);
                    let aom_b_blue = blue_tone(input, m, s_a, aom_a);
                    let mut plan = GatePlan {
                        n,
                        m,
                        s_a,
                        aom_a,
                        aom_b_red,
                        aom_b_blue,
                        residual_red: 0.0,
                        residual_blue: 0.0,
                    };
                    let report = validate_gate_plan(&plan, input);
                    plan.residual_red = report.residual_red;
                    plan.residual_blue = report.residual_blue;
                    plans.push(plan);
                }
            }
        }
    }

    let center = window.center();
    let merit = |p: &GatePlan| (p.aom_b_red - center).abs() + (p.aom_b_blue - center).abs();
    plans.sort_by(|a, b| {
        merit(a)
            .total_cmp(&merit(b))
            .then(a.n.cmp(&b.n))
            .then(a.m.cmp(&b.m))
            .then(b.s_a.cmp(&a.s_a))
            .then(a.aom_a.total_cmp(&b.aom_a))
    });
    if !plans.is_empty() {
        diagnostics.clear();
    } else if input.aom_a_candidates.is_empty() {
        diagnostics.push("no AOM A candidates".into());
    }
    Ok(PlanSet { plans, diagnostics })
}

/// Every tooth `p` whose required gap `ν_B,1 − ν_B,2 = ν0 − p·νr` fits in the
/// AOM B window. Tones are placed symmetrically about the window centre, so
/// plans sort by `|gap|`, then `p`.
pub fn plan_copropagating(input: &PlannerInput) -> Result<PlanSet<CoPropPlan>, PlannerError> {
    input.validate()?;
    let window = input.aom_b_window;
    let center = window.center();
    let width = window.width();
    let gap = |p: i64| input.qubit_frequency - p as f64 * input.rep_rate;

    let mut plans: Vec<CoPropPlan> = feasible_teeth(input.teeth, Band::new(-width, width), input.rep_rate, gap, -1.0)
        .into_iter()
        .map(|p| {
            let g = gap(p);
            let mut plan = CoPropPlan { p, aom_b_first: center + g / 2.0, aom_b_second: center - g / 2.0, residual: 0.0 };
            plan.residual = validate_coprop_plan(&plan, input).residual;
            plan
        })
        .filter(|plan| window.contains(plan.aom_b_first) && window.contains(plan.aom_b_second))
        .collect();
    plans.sort_by(|a, b| gap(a.p).abs().total_cmp(&gap(b.p).abs()).then(a.p.cmp(&b.p)));

    let mut diagnostics = Vec::new();
    if plans.is_empty() {
        let p = nearest_tooth(input.teeth, input.qubit_frequency / input.rep_rate);
        diagnostics.push(format!(
            "no tooth fits AOM B window {window}; nearest p = {p} needs a tone gap of {} Hz (window width {width} Hz)",
            gap(p)
        ));
    }
    Ok(PlanSet { plans, diagnostics })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateResidualReport {
    pub residual_red: f64,
    pub residual_blue: f64,
    pub aom_a_in_window: bool,
    pub aom_b_red_in_window: bool,
    pub aom_b_blue_in_window: bool,
    pub teeth_in_range: bool,
}

impl GateResidualReport {
    pub fn ok(&self) -> bool {
        self.residual_red.abs() < RESIDUAL_TOLERANCE
            && self.residual_blue.abs() < RESIDUAL_TOLERANCE
            && self.aom_a_in_window
            && self.aom_b_red_in_window
            && self.aom_b_blue_in_window
            && self.teeth_in_range
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoPropResidualReport {
    pub residual: f64,
    pub tones_in_window: bool,
    pub tooth_in_range: bool,
}

impl CoPropResidualReport {
    pub fn ok(&self) -> bool {
        self.residual.abs() < RESIDUAL_TOLERANCE && self.tones_in_window && self.tooth_in_range
    }
}

/// Recomputes both resonance residuals (left minus right side) and window
/// membership. Never fails.
pub fn validate_gate_plan(plan: &GatePlan, input: &PlannerInput) -> GateResidualReport {
    let s = plan.s_a.value();
    let red_lhs = plan.n as f64 * input.rep_rate - s * plan.aom_a - plan.aom_b_red;
    let blue_lhs = plan.m as f64 * input.rep_rate + plan.aom_b_blue + s * plan.aom_a;
    GateResidualReport {
        residual_red: red_lhs - input.red_target(),
        residual_blue: blue_lhs - input.blue_target(),
        aom_a_in_window: input.aom_a_allowed(plan.aom_a),
        aom_b_red_in_window: input.aom_b_window.contains(plan.aom_b_red),
        aom_b_blue_in_window: input.aom_b_window.contains(plan.aom_b_blue),
        teeth_in_range: input.teeth.contains(plan.n) && input.teeth.contains(plan.m),
    }
}

pub fn validate_coprop_plan(plan: &CoPropPlan, input: &PlannerInput) -> CoPropResidualReport {
    let lhs = plan.p as f64 * input.rep_rate + plan.aom_b_first - plan.aom_b_second;
    CoPropResidualReport {
        residual: lhs - input.qubit_frequency,
        tones_in_window: input.aom_b_window.contains(plan.aom_b_first)
            && input.aom_b_window.contains(plan.aom_b_second),
        tooth_in_range: input.teeth.contains(plan.p),
    }
}
