#![allow(dead_code)]

use phasestable::config::RunConfig;
use phasestable::freq_planner::PlannerInput;
use phasestable::signal_chain::{ChainGraph, Preset};
use phasestable::Sign;
use std::collections::BTreeSet;
use std::path::PathBuf;

/// Three-PLL circuit on the n = 160, m = 154 gate plan.
pub fn three_pll_config() -> RunConfig {
    let mut c = RunConfig::default();
    c.chain.n = Some(160);
    c.chain.m = Some(154);
    c
}

/// Single-PLL circuit on the n = m = p = 157 plan with ν_A = 160 MHz.
pub fn single_pll_config() -> RunConfig {
    let mut c = RunConfig::default();
    c.planner.aom_a_candidates = vec![160e6];
    c.planner.aom_a_signs = vec![Sign::Minus];
    c.chain.preset = Preset::SinglePll;
    c
}

pub fn three_pll() -> ChainGraph {
    three_pll_config().build_chain().expect("three-PLL chain builds")
}

pub fn single_pll() -> ChainGraph {
    single_pll_config().build_chain().expect("single-PLL chain builds")
}

pub fn shipped_config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// Every (n, m, s_A, ν_A) combination checked directly against both lines.
pub fn brute_gate(input: &PlannerInput) -> BTreeSet<(i64, i64, i8, u64)> {
    let w = input.aom_b_window;
    let mut out = BTreeSet::new();
    for &a in &input.aom_a_candidates {
        for &s in &input.aom_a_signs {
            let sv = if s == Sign::Plus { 1.0 } else { -1.0 };
            for n in input.teeth.lo..=input.teeth.hi {
                let red = n as f64 * input.rep_rate - sv * a - (input.qubit_frequency - input.mode_frequency + input.detuning);
                if red < w.lo || red > w.hi {
                    continue;
                }
                for m in input.teeth.lo..=input.teeth.hi {
                    let blue = (input.qubit_frequency + input.mode_frequency - input.detuning) - m as f64 * input.rep_rate - sv * a;
                    if blue >= w.lo && blue <= w.hi {
                        out.insert((n, m, sv as i8, a.to_bits()));
                    }
                }
            }
        }
    }
    out
}

pub fn brute_coprop(input: &PlannerInput) -> BTreeSet<i64> {
    let w = input.aom_b_window;
    let c = 0.5 * (w.lo + w.hi);
    (input.teeth.lo..=input.teeth.hi)
        .filter(|&p| {
            let g = input.qubit_frequency - p as f64 * input.rep_rate;
            let (b1, b2) = (c + g / 2.0, c - g / 2.0);
            b1 >= w.lo && b1 <= w.hi && b2 >= w.lo && b2 <= w.hi
        })
        .collect()
}

