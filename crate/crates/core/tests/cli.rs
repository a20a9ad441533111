use std::path::Path;
use std::process::{Command, Output};

use lecam::dist::io::load_grid_csv;
use lecam::report::Report;
use lecam::scenario::{run, ScenarioConfig};
use serde_json::{json, Value};

fn lecam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lecam")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn parse(o: &Output) -> Report {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn list_shows_the_catalog() {
    let o = lecam(&["list"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).lines().count() >= 8);
    let o = lecam(&["list", "--json"]);
    let v: Vec<Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.len() >= 8);
    assert!(v.iter().all(|s| s["description"].is_string() && s["anchor"].is_string()));
}

#[test]
fn run_writes_report_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("kernel");
    let o = lecam(&["run", "kernel", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = parse(&o);
    let file: Report = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(stdout, file);
    assert!(file.pass);
    let csvs: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    assert!(!csvs.is_empty());
}

#[test]
fn measure_artifacts_reload() {
    let dir = tempfile::tempdir().unwrap();
    let o = lecam(&["run", "spread", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let mut loaded = 0;
    for e in std::fs::read_dir(dir.path()).unwrap() {
        let p = e.unwrap().path();
        let head = std::fs::read_to_string(&p).unwrap();
        if p.extension().is_some_and(|x| x == "csv") && head.starts_with("x,mass") {
            let m = load_grid_csv(&p).unwrap();
            assert!((m.total_mass() - 1.0).abs() < 1e-6, "{}", p.display());
            loaded += 1;
        }
    }
    assert!(loaded > 0, "no measure CSV written");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    for args in [
        vec!["run", "nope"],
        vec!["run", "conv", "--bogus", "1"],
        vec!["run", "lan", "--tol", "nope=1"],
        vec!["run", "lan", "--tol", "z"],
        vec!["run", "lan", "--seed", "minus"],
        vec!["run", "lan", "--streams", "0"],
        vec!["run", "lan", "--n", "0"],
        vec!["run", "--config", missing.to_str().unwrap()],
        vec!["run"],
    ] {
        let o = lecam(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?} produced a report");
    }
}

#[test]
fn failed_check_exits_one_with_full_report() {
    let q = r#"{"law":"normal","mean":0,"var":1}"#;
    let p = r#"{"law":"normal","mean":0,"var":2}"#;
    let o = lecam(&["run", "spread", "--q", q, "--p", p]);
    assert_eq!(code(&o), 1);
    let r = parse(&o);
    assert!(!r.pass);
    assert!(!r.check("verdict_as_expected").unwrap().pass);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let cfg = json!({"scenario": "lan", "reps": 2000, "n": 10, "tolerances": {"z": 4}});
    std::fs::write(&path, cfg.to_string()).unwrap();
    let o = lecam(&["run", "--config", path.to_str().unwrap(), "--seed", "7", "--theta=-2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = parse(&o);
    assert_eq!(r.seed, 7);
    assert_eq!(r.config["reps"], 2000);
    assert_eq!(r.config["n"], 10);
    assert_eq!(r.config["theta"], -2.0);
    assert_eq!(r.config["tolerances"]["z"], 4.0);
    assert_eq!(r.check("likelihood_ratio_unit_mean_z").unwrap().threshold, 4.0);
}

fn without_duration(path: &Path) -> String {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["duration_secs"] = json!(0);
    v.to_string()
}

#[test]
fn reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(code(&lecam(&["run", "rao", "--reps", "4000", "--out", d.to_str().unwrap()])), 0);
    }
    assert_eq!(without_duration(&a.join("report.json")), without_duration(&b.join("report.json")));
    for e in std::fs::read_dir(&a).unwrap() {
        let name = e.unwrap().file_name();
        if name != "report.json" {
            assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap());
        }
    }
}

#[test]
fn seed_changes_monte_carlo_values() {
    let a = parse(&lecam(&["run", "lan", "--reps", "2000", "--seed", "1"]));
    let b = parse(&lecam(&["run", "lan", "--reps", "2000", "--seed", "2"]));
    let z = |r: &Report| r.check("likelihood_ratio_unit_mean_z").unwrap().value;
    assert_ne!(z(&a), z(&b));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let first = run(&ScenarioConfig::from_value(json!({"scenario": "lan", "model": "gamma_scale", "reps": 3000})).unwrap())
        .unwrap()
        .report;
    let again = run(&ScenarioConfig::from_value(first.config.clone()).unwrap()).unwrap().report;
    assert_eq!(first.checks, again.checks);
    assert_eq!(first.config, again.config);
}

#[test]
fn lan_example_has_zero_remainder() {
    let o = lecam(&["run", "lan", "--model", "gaussian_location", "--n", "100", "--theta", "1"]);
    assert_eq!(code(&o), 0);
    assert!(parse(&o).check("remainder_max").unwrap().value <= 1e-12);
}
