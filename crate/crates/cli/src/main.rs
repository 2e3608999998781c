use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phasestable::config::{ConfigError, RunConfig, SetupError};
use phasestable::experiments::{ExperimentError, ScenarioId};
use phasestable::freq_planner::{plan_copropagating, plan_gate, PlannerError};
use phasestable::signal_chain::{NodeKind, Transition};

mod output;

use output::{Meta, Written};

/// Zero-sensitivity contract for `chain-verify`, Hz per Hz of repetition-rate drift.
const SENSITIVITY_LIMIT: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "phasestable", version, about = "Frequency planning, chain verification and gate-phase scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search comb-tooth and AOM plans for the configured planner inputs.
    Plan(Invocation),
    /// Check the configured chain's repetition-rate drift sensitivity.
    ChainVerify(Invocation),
    /// Run the configured scenario.
    Run(Invocation),
    /// List scenario ids and their sweep variables.
    ListScenarios,
}

#[derive(Debug, Args)]
struct Invocation {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides `scenario.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        self != Format::Json
    }

    fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Contract(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Contract(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Contract(m) => m,
        }
    }
}

impl From<SetupError> for Failure {
    fn from(e: SetupError) -> Self {
        match e {
            SetupError::Config(_)
            | SetupError::Planner(PlannerError::InvalidInput(_))
            | SetupError::Experiment(ExperimentError::InvalidConfig(_) | ExperimentError::ConfigMismatch { .. }) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Contract(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("cannot write output: {e}"))
    }
}

struct Loaded {
    config: RunConfig,
    meta: Meta,
}

fn known_scenarios() -> String {
    ScenarioId::ALL.iter().map(|id| id.as_str()).collect::<Vec<_>>().join(", ")
}

/// Whether `line` (1-based) sits under the `[scenario]` table of `source`.
fn in_scenario_table(source: &str, line: usize) -> bool {
    source
        .lines()
        .take(line)
        .filter_map(|l| l.trim().strip_prefix('[').and_then(|h| h.split(']').next()))
        .last()
        .is_some_and(|h| h.trim() == "scenario")
}

fn load(inv: &Invocation) -> Result<Loaded, Failure> {
    let bytes = fs::read(&inv.config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", inv.config.display())))?;
    let source = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::Usage(format!("{}: not valid UTF-8", inv.config.display())))?;
    let mut config = RunConfig::from_toml(&source).map_err(|e| {
        let mut msg = format!("{}: {e}", inv.config.display());
        if let ConfigError::Parse { message, line: Some(line), .. } = &e {
            if message.contains("unknown variant") && in_scenario_table(&source, *line) {
                msg.push_str(&format!("\nknown scenarios: {}", known_scenarios()));
            }
        }
        Failure::Usage(msg)
    })?;
    if let Some(seed) = inv.seed {
        config.scenario.seed = seed;
    }
    let meta = Meta::new(config.scenario.id, config.scenario.seed, &bytes);
    Ok(Loaded { config, meta })
}

fn report(written: &Written) {
    for path in written.paths() {
        eprintln!("wrote {}", path.display());
    }
}

fn cmd_plan(inv: &Invocation) -> Result<(), Failure> {
    let Loaded { config, meta } = load(inv)?;
    let gates = plan_gate(&config.planner).map_err(|e| Failure::Usage(e.to_string()))?;
    let carriers = plan_copropagating(&config.planner).map_err(|e| Failure::Usage(e.to_string()))?;

    let mut written = Written::new(&inv.out)?;
    if inv.format.csv() {
        written.put("plans_gate.csv", &output::gate_csv(&meta, &gates.plans))?;
        written.put("plans_copropagating.csv", &output::coprop_csv(&meta, &carriers.plans))?;
    }
    if inv.format.json() {
        written.put("plans_gate.json", &output::json(&meta, "plans", &gates)?)?;
        written.put("plans_copropagating.json", &output::json(&meta, "plans", &carriers)?)?;
    }
    report(&written);

    println!("gate plans: {}", gates.plans.len());
    for p in gates.plans.iter().take(5) {
        println!(
            "  n={} m={} s_A={} nu_A={:.6} MHz nu_B,r={:.6} MHz nu_B,b={:.6} MHz",
            p.n,
            p.m,
            p.s_a,
            p.aom_a / 1e6,
            p.aom_b_red / 1e6,
            p.aom_b_blue / 1e6
        );
    }
    println!("copropagating plans: {}", carriers.plans.len());
    for p in carriers.plans.iter().take(5) {
        println!("  p={} nu_B,1={:.6} MHz nu_B,2={:.6} MHz", p.p, p.aom_b_first / 1e6, p.aom_b_second / 1e6);
    }

    let mut empty = Vec::new();
    for (what, diagnostics, none) in [
        ("gate", &gates.diagnostics, gates.is_empty()),
        ("copropagating", &carriers.diagnostics, carriers.is_empty()),
    ] {
        if none {
            for d in diagnostics {
                eprintln!("{what}: {d}");
            }
            empty.push(what);
        }
    }
    if empty.is_empty() {
        Ok(())
    } else {
        Err(Failure::Contract(format!("no feasible {} plan", empty.join(" or "))))
    }
}

fn cmd_chain_verify(inv: &Invocation) -> Result<(), Failure> {
    let Loaded { config, meta } = load(inv)?;
    let chain = config.build_chain()?;
    let bypassed = chain.with_feed_forward(false);

    let mut rows = Vec::new();
    for t in Transition::ALL {
        let configured = chain.drift_sensitivity(t).map_err(|e| Failure::Contract(e.to_string()))?;
        let open = bypassed.drift_sensitivity(t).map_err(|e| Failure::Contract(e.to_string()))?;
        rows.push(output::SensitivityRow { transition: t, configured, bypassed: open });
    }
    let prop = chain.propagate(0.0).map_err(|e| Failure::Contract(e.to_string()))?;
    let beats: Vec<(String, f64)> = chain
        .nodes()
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Pll { .. }))
        .filter_map(|n| prop.get(&n.name).and_then(|t| t.first()).map(|t| (n.name.clone(), t.frequency)))
        .collect();
    let pass = rows.iter().all(|r| r.configured.abs() < SENSITIVITY_LIMIT);

    let mut written = Written::new(&inv.out)?;
    if inv.format.csv() {
        written.put("chain_verify.csv", &output::sensitivity_csv(&meta, &rows))?;
    }
    if inv.format.json() {
        written.put("chain.json", &output::chain_json(&meta, &chain, &rows, &beats, pass)?)?;
    }
    report(&written);

    println!("preset: {}", config.chain.preset);
    println!("{:<24}{:>16}{:>16}", "transition", "configured", "bypassed");
    for r in &rows {
        println!("{:<24}{:>16.3e}{:>16.6}", r.transition.to_string(), r.configured, r.bypassed);
    }
    for (name, f) in &beats {
        println!("{name}: {:.6} MHz", f / 1e6);
    }
    if pass {
        println!("PASS: |d nu_beat / d delta_r| < {SENSITIVITY_LIMIT:e} on every transition");
        Ok(())
    } else {
        println!("FAIL: drift sensitivity above {SENSITIVITY_LIMIT:e}");
        Err(Failure::Contract("chain is sensitive to repetition-rate drift".into()))
    }
}

fn cmd_run(inv: &Invocation) -> Result<(), Failure> {
    let Loaded { config, meta } = load(inv)?;
    let result = config.run()?;

    let stem = format!("{}_{}", config.scenario.id.as_str(), config.scenario.seed);
    let pairs = meta.pairs();
    let mut written = Written::new(&inv.out)?;
    if inv.format.csv() {
        written.put(&format!("{stem}.csv"), &result.to_csv(&pairs))?;
    }
    if inv.format.json() {
        written.put(&format!("{stem}.json"), &result.to_json(&pairs))?;
    }
    report(&written);

    println!("scenario={} seed={}", config.scenario.id, config.scenario.seed);
    for (k, v) in &result.summary {
        println!("  {k} = {}", v + 0.0);
    }
    Ok(())
}

fn cmd_list_scenarios() {
    for id in ScenarioId::ALL {
        println!("{:<16}{:<28}{}", id.as_str(), id.sweep_names().join(","), id.description());
    }
}

fn dispatch(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Plan(inv) => cmd_plan(inv),
        Command::ChainVerify(inv) => cmd_chain_verify(inv),
        Command::Run(inv) => cmd_run(inv),
        Command::ListScenarios => {
            cmd_list_scenarios();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
