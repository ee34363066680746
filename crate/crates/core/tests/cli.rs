//! End-to-end runs of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

use radial_mes::sim::read_curve_csv;

fn bin(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radial-mes"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("RADIAL_MES_OUT")
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = bin(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn records(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

const SMALL_SIM: [&str; 9] = ["simulate", "--model", "model_ii", "--n", "200", "--M", "16", "--k-grid", "20,40"];

#[test]
fn simulate_writes_curves_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &[&["--seed", "5"], &SMALL_SIM[..]].concat());
    for f in ["curves.csv", "config.toml"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    assert!(std::fs::read_dir(dir.path()).unwrap().any(|e| e.unwrap().path().extension() == Some("svg".as_ref())));
    let rows = read_curve_csv(&dir.path().join("curves.csv")).unwrap();
    assert!(rows.iter().any(|r| r.estimator_or_ci == "plain:x1" && r.metric == "mse" && r.k == 40));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(a.path(), &[&["--seed", "11"], &SMALL_SIM[..]].concat());
    let cfg = a.path().join("config.toml");
    ok(b.path(), &["--config", cfg.to_str().unwrap(), "simulate"]);
    let read = |d: &Path| std::fs::read(d.join("curves.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let c = tempfile::tempdir().unwrap();
    ok(c.path(), &["--config", cfg.to_str().unwrap(), "--threads", "1", "simulate"]);
    assert_eq!(read(a.path()), read(c.path()));
}

#[test]
fn oracle_reports_every_component() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["oracle", "--model", "model_iv", "--draws", "100000"]);
    let rows = records(&dir.path().join("oracle.csv"));
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r[1].parse::<f64>().unwrap() > 0.0);
    }
}

// A single panel estimate should land inside the Monte Carlo spread of the
// same estimator over many panels of the same model and size.
#[test]
fn estimate_on_a_sampled_panel_is_within_the_simulated_spread() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["--seed", "3", "sample", "--model", "model_iii", "--n", "500"]);
    let panel = p.join("panel.csv");
    ok(p, &["estimate", "--data", panel.to_str().unwrap(), "--k", "50", "--estimators", "plain"]);
    let est = records(&p.join("estimate.csv"));
    assert_eq!(est.len(), 2);
    let theta: f64 = est[0][3].parse().unwrap();
    let (lo, hi): (f64, f64) = (est[0][4].parse().unwrap(), est[0][5].parse().unwrap());
    assert!(lo <= hi);

    let sim = tempfile::tempdir().unwrap();
    ok(sim.path(), &["--seed", "4", "simulate", "--model", "model_iii", "--n", "500", "--M", "200", "--k-grid", "50", "--estimators", "plain"]);
    let rows = read_curve_csv(&sim.path().join("curves.csv")).unwrap();
    let metric = |m: &str| rows.iter().find(|r| r.estimator_or_ci == "plain:x1" && r.metric == m).unwrap().value;
    let (mean, sd) = (metric("mean"), metric("variance").sqrt());
    assert!((theta - mean).abs() <= 4.0 * sd, "theta {theta}, simulated mean {mean} sd {sd}");
}

#[test]
fn serial_reports_inflation() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["serial", "--process", "ar1:0.7,0.5", "--n", "2000", "--k", "200", "--lags", "5"]);
    assert!(!records(&dir.path().join("serial.csv")).is_empty());
}

#[test]
fn exit_codes_separate_usage_from_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(bin(p, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(bin(p, &["simulate", "--k-fractions", "0.1", "--k-grid", "10"]).status.code(), Some(2));
    let missing = p.join("nope.csv");
    let o = bin(p, &["estimate", "--data", missing.to_str().unwrap(), "--k", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kind="));
    assert_eq!(bin(p, &["--help"]).status.code(), Some(0));
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_radial-mes"))
        .args(["oracle", "--model", "model_i", "--draws", "100000"])
        .env("RADIAL_MES_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("oracle.csv").is_file());
}
