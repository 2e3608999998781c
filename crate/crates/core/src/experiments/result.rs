use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::ScenarioId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub series: String,
    pub x: f64,
    pub mean: f64,
    pub std_err: f64,
}

/// A random quantity drawn at one sweep point, kept for audits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseDraw {
    pub index: usize,
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario: ScenarioId,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub noise_draws: Vec<NoiseDraw>,
    /// Fit outputs and derived figures, keyed by name.
    pub summary: BTreeMap<String, f64>,
}

impl RunResult {
    pub(crate) fn new(scenario: ScenarioId, seed: u64) -> Self {
        Self { scenario, seed, rows: Vec::new(), noise_draws: Vec::new(), summary: BTreeMap::new() }
    }

    pub(crate) fn push(&mut self, series: &str, x: f64, mean: f64, std_err: f64) {
        self.rows.push(Row { series: series.to_string(), x, mean, std_err });
    }

    pub(crate) fn draw(&mut self, index: usize, name: &str, value: f64) {
        self.noise_draws.push(NoiseDraw { index, name: name.to_string(), value });
    }

    pub(crate) fn note(&mut self, key: &str, value: f64) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn series<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.series == name)
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }

    /// Rows as CSV with one leading `#` comment line holding `meta`.
    pub fn to_csv(&self, meta: &[(&str, String)]) -> String {
        let mut out = String::from("#");
        for (k, v) in meta {
            let _ = write!(out, " {k}={v}");
        }
        out.push('\n');
        out.push_str("series,x,mean,std_err\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.series, r.x, r.mean, r.std_err);
        }
        out
    }

    /// Pretty JSON with `meta` stored under `"meta"`.
    pub fn to_json(&self, meta: &[(&str, String)]) -> String {
        let meta: BTreeMap<&str, &str> = meta.iter().map(|(k, v)| (*k, v.as_str())).collect();
        let value = serde_json::json!({ "meta": meta, "result": self });
        let mut s = serde_json::to_string_pretty(&value).expect("result serialises");
        s.push('\n');
        s
    }
}
