use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phasestable"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_scenarios_names_every_id() {
    let o = bin().arg("list-scenarios").output().unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for id in ["ramsey", "parity_scan", "sideband_shift", "random_phase", "stability", "alignment"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id}");
    }
}

#[test]
fn plan_writes_tables_with_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("three_pll.toml");
    let o = run(&["plan", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let gate = fs::read_to_string(dir.path().join("plans_gate.csv")).unwrap();
    let mut lines = gate.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# scenario=") && header.contains(" seed=") && header.contains(" config_sha256="));
    assert_eq!(lines.next().unwrap(), "n,m,s_a,nu_a_hz,nu_b_r_hz,nu_b_b_hz,residual_r_hz,residual_b_hz");
    assert!(lines.any(|l| l.starts_with("160,154,1,")));
    let coprop = fs::read_to_string(dir.path().join("plans_copropagating.csv")).unwrap();
    assert!(coprop.lines().nth(2).unwrap().starts_with("157,"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("plans_gate.json")).unwrap()).unwrap();
    assert!(json["meta"]["config_sha256"].as_str().unwrap().len() == 64);
    assert!(json["plans"]["plans"].as_array().unwrap().len() >= 2);
}

#[test]
fn infeasible_plan_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("narrow.toml");
    fs::write(&path, "schema_version = 1\n[planner]\naom_b_window = { lo = 100e6, hi = 100.001e6 }\n").unwrap();
    let o = run(&["plan", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("no feasible"));
}

#[test]
fn malformed_config_exits_1_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "schema_version = 1\n[planner]\nrep_rate = \"fast\"\n").unwrap();
    for cmd in ["plan", "chain-verify", "run"] {
        let o = run(&[cmd, "--config", path.to_str().unwrap()], dir.path());
        assert_eq!(code(&o), 1, "{cmd}");
        assert!(stderr(&o).contains("line 3"), "{cmd}: {}", stderr(&o));
    }
}

#[test]
fn missing_config_and_bad_usage_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "--config", "/nonexistent/run.toml"], dir.path());
    assert_eq!(code(&o), 1);
    assert_eq!(code(&bin().arg("run").output().unwrap()), 1);
    assert_eq!(code(&bin().args(["plan", "--config", "x", "--format", "xml"]).output().unwrap()), 1);
    assert_eq!(code(&bin().arg("frobnicate").output().unwrap()), 1);
}

#[test]
fn unknown_scenario_lists_ids() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unknown.toml");
    fs::write(&path, "schema_version = 1\n[scenario]\nid = \"teleport\"\n").unwrap();
    let o = run(&["run", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("known scenarios: ramsey, parity_scan, sideband_shift, random_phase, stability, alignment"));
}

#[test]
fn chain_verify_passes_for_presets_and_fails_when_bypassed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["three_pll.toml", "single_pll.toml"] {
        let cfg = config(name);
        let o = run(&["chain-verify", "--config", cfg.to_str().unwrap()], dir.path());
        assert_eq!(code(&o), 0, "{name}: {}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
    }
    let csv = fs::read_to_string(dir.path().join("chain_verify.csv")).unwrap();
    assert!(csv.contains("red_sideband,0,157"));

    let source = fs::read_to_string(config("three_pll.toml")).unwrap();
    let bypassed = dir.path().join("bypassed.toml");
    fs::write(&bypassed, source.replace("feed_forward = true", "feed_forward = false")).unwrap();
    assert_ne!(source, fs::read_to_string(&bypassed).unwrap());
    let o = run(&["chain-verify", "--config", bypassed.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let cfg = config("sideband_shift.toml");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let oa = run(&["run", "--config", cfg.to_str().unwrap()], a.path());
    let ob = run(&["run", "--config", cfg.to_str().unwrap()], b.path());
    assert_eq!(code(&oa), 0, "{}", stderr(&oa));
    assert_eq!(oa.stdout, ob.stdout);
    let names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
    }
}

#[test]
fn seed_override_names_files_and_changes_draws() {
    let cfg = config("parity_scan.toml");
    let dir = tempfile::tempdir().unwrap();
    for seed in ["11", "12"] {
        let o = run(&["run", "--config", cfg.to_str().unwrap(), "--seed", seed, "--format", "csv"], dir.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let a = fs::read_to_string(dir.path().join("parity_scan_11.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("parity_scan_12.csv")).unwrap();
    assert!(a.starts_with("# scenario=parity_scan seed=11 config_sha256="));
    assert!(b.starts_with("# scenario=parity_scan seed=12 config_sha256="));
    assert_ne!(a.lines().skip(1).collect::<Vec<_>>(), b.lines().skip(1).collect::<Vec<_>>());
    assert!(!dir.path().join("parity_scan_11.json").exists());
}

#[test]
fn json_format_only() {
    let cfg = config("alignment.toml");
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--format", "json", "--seed", "3"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("alignment_3.json")).unwrap()).unwrap();
    assert_eq!(json["meta"]["seed"], "3");
    assert_eq!(json["result"]["scenario"], "alignment");
    assert!(!dir.path().join("alignment_3.csv").exists());
}
