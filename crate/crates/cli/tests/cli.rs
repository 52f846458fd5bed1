use std::path::Path;
use std::process::{Command, Output};

use chemorepel::thresholds::{search_three_root, SearchBox};
use chemorepel_cli::config::{self, Overrides};
use chemorepel_cli::scenario::{run_scenario, ConvergedTo};
use chemorepel_cli::sweep::{run_sweep, SWEEP_HEADER};
use serde_json::{json, Value};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chemorepel")).args(args).output().expect("spawn")
}

fn json_out(args: &[&str]) -> Value {
    let out = bin(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn thresholds(d: f64, chi: f64, r: f64, a: f64, f: f64) -> Value {
    let sets = [("D", d), ("chi", chi), ("r", r), ("a", a), ("f", f)].map(|(k, v)| format!("{k}={v}"));
    let mut args = vec!["thresholds"];
    for s in &sets {
        args.extend(["--set", s.as_str()]);
    }
    json_out(&args)
}

fn overrides(scenario: &str, set: &[&str]) -> Overrides {
    Overrides {
        scenario: Some(scenario.into()),
        set: set.iter().map(|s| s.to_string()).collect(),
        ..Default::default()
    }
}

fn cfg_with(base: Value) -> config::RunConfig {
    config::run_config(base).unwrap()
}

fn column<'a>(csv: &'a str, name: &str) -> Vec<&'a str> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap()).collect()
}

#[test]
fn reference_threshold_report() {
    let rep = thresholds(1.0, 1.0, 1.0, 1.0, 0.0);
    assert_eq!(rep["cubic"], json!([16.0, 7.0, -24.0, -16.0]));
    assert!((rep["r_c"].as_f64().unwrap() - 1.30288663).abs() < 1e-6);
    assert_eq!(rep["branch"], "single_root");
    assert_eq!(rep["above_critical_rate"], false);
}

#[test]
fn degenerate_thresholds_vanish() {
    let rep = thresholds(1.0, 1.0, 2.0, 0.0, 1.0);
    assert_eq!(rep["r_c"], 0.0);
    assert_eq!(rep["branch"], "no_self_production");
    let rep = thresholds(1.0, 0.0, 2.0, 1.0, 1.0);
    assert_eq!(rep["r_c"], 0.0);
    assert_eq!(rep["branch"], "taxis_free");
    assert_eq!(rep["taxis_free"], true);
}

#[test]
fn sweep_reports_regimes() {
    let mut v = config::resolve_value(&overrides("extinction", &["f=1"])).unwrap();
    v["sweep"] = json!({"param": "r", "values": [0.5, 1.0, 2.0], "simulate": false});
    let csv = run_sweep(&cfg_with(v), Some(2)).unwrap();
    assert_eq!(csv.lines().next().unwrap(), SWEEP_HEADER);
    assert_eq!(column(&csv, "regime"), ["extinction", "degenerate", "coexistence"]);
    assert_eq!(column(&csv, "termination"), ["", "", ""]);
}

#[test]
fn parallel_sweep_matches_serial() {
    let mut v = config::resolve_value(&overrides(
        "taxis-free",
        &["grid.n_x=16", "t_end=0.5", "monitor_every=10", "chi=0.5"],
    ))
    .unwrap();
    v["sweep"] = json!({"param": "r", "min": 0.75, "max": 2.5, "count": 8});
    let cfg = cfg_with(v);
    let serial = run_sweep(&cfg, Some(1)).unwrap();
    let parallel = run_sweep(&cfg, Some(4)).unwrap();
    assert_eq!(serial, parallel);
    assert_eq!(serial.lines().count(), 9);
    assert!(column(&serial, "error").iter().all(|e| e.is_empty()), "{serial}");
}

fn noisy_run(dir: &Path, seed: &str) -> String {
    let out = bin(&[
        "simulate", "--scenario", "pattern", "--seed", seed,
        "--set", "grid.n_x=24", "--set", "t_end=1", "--set", "monitor_every=5",
        "--out", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(dir.join("trajectory.csv")).unwrap()
}

#[test]
fn same_seed_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = noisy_run(&tmp.path().join("a"), "11");
    let b = noisy_run(&tmp.path().join("b"), "11");
    let c = noisy_run(&tmp.path().join("c"), "12");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn trivial_state_is_invariant_when_cells_persist() {
    let v = config::resolve_value(&overrides(
        "persistence",
        &[
            r#"initial.u={"kind":"constant","value":0.0}"#,
            r#"initial.v={"kind":"constant","value":"supply"}"#,
            "f=0.5",
            "t_end=10",
            "steady_tol=1e-300",
            "monitor_every=50",
            "grid.n_x=32",
        ],
    ))
    .unwrap();
    let s = run_scenario(&cfg_with(v), None).unwrap();
    assert!(s.t_final >= 10.0 - 1e-12 || s.termination == chemorepel::model::Termination::Steady);
    assert_eq!(s.converged_to, Some(ConvergedTo::Trivial));
    let (us, vs) = s.target;
    assert!((s.final_linf_u_dev - us).abs() < 1e-10);
    assert!((s.final_linf_v_dev - (vs - 0.5)).abs() < 1e-10);
}

#[test]
fn feasibility_flips_across_the_critical_rate() {
    let (hit, _) = search_three_root(&SearchBox::default());
    let hit = hit.expect("three-root parameters");
    let [_, r2, r3] = hit.roots;
    let mut v = config::resolve_value(&overrides("pattern", &[])).unwrap();
    let mid = (r2 * r3).sqrt();
    v["sweep"] = json!({"param": "r", "values": [mid, 0.99 * r3, 1.01 * r3], "simulate": false});
    let csv = run_sweep(&cfg_with(v), None).unwrap();
    assert_eq!(column(&csv, "above_critical_rate"), ["false", "false", "true"]);
    assert_eq!(column(&csv, "branch"), ["three_roots"; 3]);
    let k_lo = column(&csv, "k_lo");
    assert!(k_lo[0].is_empty(), "{csv}");
    assert!(!k_lo[2].is_empty());
}

#[test]
fn lyapunov_check_recomputes_decay() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let d = dir.to_str().unwrap();
    let summary = json_out(&[
        "simulate", "--scenario", "persistence", "--set", "grid.n_x=32",
        "--set", "t_end=2", "--set", "monitor_every=10", "--set", "snapshot_every=1", "--out", d,
    ]);
    let check = json_out(&["lyapunov-check", "--run", d]);
    assert_eq!(check["snapshots"], summary["samples"]);
    assert_eq!(check["decay"]["violations"], 0);
    assert_eq!(check["decay"]["intervals"], summary["decay"]["intervals"]);
    assert!(dir.join("lyapunov_check.json").exists());
    for f in ["config.json", "summary.json", "trajectory.csv", "snapshots.jsonl"] {
        assert!(dir.join(f).exists(), "{f}");
    }
}

#[test]
fn bad_input_fails_cleanly() {
    let out = bin(&["simulate", "--scenario", "persistence", "--set", "r=-1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert!(!bin(&["simulate", "--scenario", "nope"]).status.success());
    assert!(!bin(&["thresholds"]).status.success());
}
