mod common;

use phasestable::config::RunConfig;
use phasestable::experiments::ScenarioId;

const SHIPPED: [&str; 9] = [
    "alignment.toml",
    "parity_scan.toml",
    "ramsey.toml",
    "ramsey_fringe.toml",
    "random_phase.toml",
    "sideband_shift.toml",
    "single_pll.toml",
    "stability.toml",
    "three_pll.toml",
];

#[test]
fn shipped_configs_load_and_build() {
    for name in SHIPPED {
        let config = RunConfig::load(&common::shipped_config(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        config.validate().unwrap();
        config.selected_plans().unwrap_or_else(|e| panic!("{name}: {e}"));
        config.build_chain().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn shipped_configs_round_trip() {
    for name in SHIPPED {
        let config = RunConfig::load(&common::shipped_config(name)).unwrap();
        let again = RunConfig::from_toml(&config.to_toml()).unwrap();
        assert_eq!(config.to_toml(), again.to_toml(), "{name}");
    }
}

#[test]
fn shipped_scenarios_run() {
    for name in ["parity_scan.toml", "ramsey_fringe.toml", "sideband_shift.toml", "alignment.toml"] {
        let config = RunConfig::load(&common::shipped_config(name)).unwrap();
        let result = config.run().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(result.scenario, config.scenario.id, "{name}");
        assert!(!result.rows.is_empty(), "{name}");
    }
}

#[test]
fn scenario_ids_are_covered_by_shipped_configs() {
    let ids: Vec<ScenarioId> =
        SHIPPED.iter().map(|n| RunConfig::load(&common::shipped_config(n)).unwrap().scenario.id).collect();
    for id in ScenarioId::ALL {
        assert!(ids.contains(&id), "{}", id.as_str());
    }
}
