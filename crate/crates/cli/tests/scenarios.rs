use std::collections::HashSet;
use std::process::Command;

use fitcheck_cli::{list_scenarios, run, run_all, CliError, Format, RunConfig};
use fitcheck_core::Report;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fitcheck"))
}

fn verdicts(r: &Report) -> Vec<(String, bool)> {
    let mut out: Vec<_> = r
        .checks
        .iter()
        .map(|c| (format!("{}/{}", r.scenario, c.name), c.pass))
        .collect();
    for sub in &r.reports {
        out.extend(verdicts(sub));
    }
    out
}

#[test]
fn every_registered_scenario_runs_and_passes() {
    let list = list_scenarios();
    assert!(list.len() >= 10);
    let names: HashSet<_> = list.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(names.len(), list.len(), "duplicate scenario names");
    let cfg = RunConfig::default();
    for d in &list {
        let r = run(&d.name, &cfg).unwrap_or_else(|e| panic!("{}: {e}", d.name));
        assert_eq!(r.scenario, d.name);
        assert!(!r.checks.is_empty(), "{} has no checks", d.name);
        assert!(r.passed(), "{}\n{}", d.name, r.to_text());
    }
}

#[test]
fn unknown_scenario_is_an_error_not_a_report() {
    let err = run("no-such-scenario", &RunConfig::default()).unwrap_err();
    assert!(matches!(err, CliError::UnknownScenario(ref n) if n == "no-such-scenario"));
}

#[test]
fn non_positive_tolerance_rejected() {
    for tol in [0.0, -1e-9, f64::NAN] {
        let cfg = RunConfig {
            tolerance: tol,
            ..RunConfig::default()
        };
        assert!(matches!(run_all(&cfg), Err(CliError::InvalidConfig(_))));
    }
}

#[test]
fn exact_twirl_survives_tiny_tolerance() {
    let cfg = RunConfig {
        tolerance: 1e-15,
        ..RunConfig::default()
    };
    let r = run("twirl-identity", &cfg).unwrap();
    assert!(r.passed(), "{}", r.to_text());
    assert_eq!(r.max_residual(), 0.0);
}

#[test]
fn run_all_is_deterministic_and_ordered() {
    let cfg = RunConfig {
        format: Format::Json,
        ..RunConfig::default()
    };
    let a = run_all(&cfg).unwrap();
    let b = run_all(&cfg).unwrap();
    assert_eq!(cfg.render(&a), cfg.render(&b));
    let names: Vec<_> = a.reports.iter().map(|r| r.scenario.clone()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert_eq!(a.checks.len(), a.reports.len());
}

#[test]
fn seed_changes_numbers_not_verdicts() {
    let base = run_all(&RunConfig::default()).unwrap();
    for seed in [1, 42, 0xDEAD_BEEF] {
        let other = run_all(&RunConfig {
            seed,
            ..RunConfig::default()
        })
        .unwrap();
        assert_eq!(other.seed, seed);
        assert_eq!(verdicts(&base), verdicts(&other), "seed {seed}");
    }
}

#[test]
fn json_report_round_trips() {
    let cfg = RunConfig {
        format: Format::Json,
        ..RunConfig::default()
    };
    let r = run("counterexample", &cfg).unwrap();
    let back: Report = serde_json::from_str(&cfg.render(&r)).unwrap();
    assert_eq!(back, r);
}

#[test]
fn binary_exit_codes() {
    let ok = bin().args(["run", "footnote"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("[PASS] footnote"));

    let unknown = bin().args(["run", "bogus"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2));
    assert!(unknown.stdout.is_empty());
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("bogus"));

    let bad_tol = bin().args(["run-all", "--tol", "0"]).output().unwrap();
    assert_eq!(bad_tol.status.code(), Some(2));

    let bad_flag = bin().args(["run-all", "--format", "xml"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(2));
}

#[test]
fn instance_flag_selects_variant() {
    let out = bin()
        .args([
            "run",
            "gpt-tomography",
            "--instance",
            "fermi",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.scenario, "gpt-tomography-fermi");
    let hol = r.check("holistic_dim").unwrap();
    assert_eq!(hol.witness.as_ref().unwrap()["value"], 4);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("fitcheck-out-{}.json", std::process::id()));
    let out = bin()
        .args(["run", "twirl-identity", "--format", "json", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(r.scenario, "twirl-identity");
}

#[test]
fn list_json_matches_registry() {
    let out = bin().args(["list", "--format", "json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), list_scenarios().len());
}
