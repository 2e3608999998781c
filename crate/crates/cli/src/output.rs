//! Output files and their metadata header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use phasestable::experiments::ScenarioId;
use phasestable::freq_planner::{CoPropPlan, GatePlan};
use phasestable::signal_chain::{ChainGraph, Transition};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const GATE_COLUMNS: &str = "n,m,s_a,nu_a_hz,nu_b_r_hz,nu_b_b_hz,residual_r_hz,residual_b_hz";
pub const COPROP_COLUMNS: &str = "p,nu_b_1_hz,nu_b_2_hz,residual_hz";

/// Scenario, seed and the SHA-256 of the config file bytes.
pub struct Meta {
    scenario: ScenarioId,
    seed: u64,
    config_sha256: String,
}

impl Meta {
    pub fn new(scenario: ScenarioId, seed: u64, config: &[u8]) -> Self {
        Self { scenario, seed, config_sha256: hex::encode(Sha256::digest(config)) }
    }

    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("scenario", self.scenario.as_str().to_string()),
            ("seed", self.seed.to_string()),
            ("config_sha256", self.config_sha256.clone()),
        ]
    }

    fn comment(&self) -> String {
        let mut out = String::from("#");
        for (k, v) in self.pairs() {
            let _ = write!(out, " {k}={v}");
        }
        out.push('\n');
        out
    }

    fn json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> =
            self.pairs().into_iter().map(|(k, v)| (k.to_string(), v.into())).collect();
        map.into()
    }
}

/// Writes files into one directory and remembers what it wrote.
pub struct Written {
    dir: PathBuf,
    paths: Vec<PathBuf>,
}

impl Written {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), paths: Vec::new() })
    }

    pub fn put(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.paths.push(path);
        Ok(())
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.paths
    }
}

pub fn gate_csv(meta: &Meta, plans: &[GatePlan]) -> String {
    let mut out = meta.comment();
    out.push_str(GATE_COLUMNS);
    out.push('\n');
    for p in plans {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.n,
            p.m,
            p.s_a.value(),
            p.aom_a,
            p.aom_b_red,
            p.aom_b_blue,
            p.residual_red,
            p.residual_blue
        );
    }
    out
}

pub fn coprop_csv(meta: &Meta, plans: &[CoPropPlan]) -> String {
    let mut out = meta.comment();
    out.push_str(COPROP_COLUMNS);
    out.push('\n');
    for p in plans {
        let _ = writeln!(out, "{},{},{},{}", p.p, p.aom_b_first, p.aom_b_second, p.residual);
    }
    out
}

/// `{"meta": …, key: value}` as pretty JSON with a trailing newline.
pub fn json<T: Serialize>(meta: &Meta, key: &str, value: &T) -> Result<String, crate::Failure> {
    let value = serde_json::to_value(value).map_err(|e| crate::Failure::Usage(e.to_string()))?;
    let mut doc = serde_json::Map::new();
    doc.insert("meta".into(), meta.json());
    doc.insert(key.into(), value);
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| crate::Failure::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
pub struct SensitivityRow {
    pub transition: Transition,
    pub configured: f64,
    pub bypassed: f64,
}

pub fn sensitivity_csv(meta: &Meta, rows: &[SensitivityRow]) -> String {
    let mut out = meta.comment();
    out.push_str("transition,configured,bypassed\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.transition, r.configured, r.bypassed);
    }
    out
}

#[derive(Serialize)]
struct ChainReport<'a> {
    pass: bool,
    sensitivity: &'a [SensitivityRow],
    pll_beats_hz: serde_json::Map<String, serde_json::Value>,
    chain: &'a ChainGraph,
}

pub fn chain_json(
    meta: &Meta,
    chain: &ChainGraph,
    rows: &[SensitivityRow],
    beats: &[(String, f64)],
    pass: bool,
) -> Result<String, crate::Failure> {
    let pll_beats_hz = beats.iter().map(|(n, f)| (n.clone(), (*f).into())).collect();
    json(meta, "report", &ChainReport { pass, sensitivity: rows, pll_beats_hz, chain })
}
