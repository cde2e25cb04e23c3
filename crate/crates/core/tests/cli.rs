use std::path::Path;
use std::process::{Command, Output};

use paraqg::snapshot::Snapshot;

const TINY: &str = "grid_n = 16\ndt = 1e-3\nt_final = 0.02\nt_burn = 0.3\nseeds = 2\neps_list = [0.4, 0.2]\n";

fn paraqg(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_paraqg"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bad_kappa_ratio_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = paraqg(dir.path(), "kappa = 0.009\nkappa_prime = 0.01\n", &["chaos-check"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kappa ratio outside (1/3, 2/3)"), "{}", stderr(&o));
}

#[test]
fn malformed_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in ["grid_n = 20\n", "eps_list = [0.1, 0.2]\n", "speed = 3\n", "theta = \"two\"\n"] {
        let o = paraqg(dir.path(), cfg, &["enhance"]);
        assert_eq!(o.status.code(), Some(2), "{cfg}: {}", stderr(&o));
    }
    let o = paraqg(dir.path(), &TINY.replace("t_burn = 0.3", "t_burn = 0.01"), &["enhance"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("insufficient burn-in"));
}

#[test]
fn chaos_check_tables_are_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = paraqg(dir.path(), TINY, &["chaos-check", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    let mut r = csv::Reader::from_path(out.join("chaos_tables.csv")).unwrap();
    let col = r.headers().unwrap().iter().position(|h| h == "max_abs_summand").unwrap();
    let rows: Vec<_> = r.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[col].parse::<f64>().unwrap() == 0.0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest_chaos-check.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 3);
    assert_eq!(manifest["seeds"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["config"]["grid_n"], 16);
    assert!(out.join("chaos_means.csv").exists());
}

#[test]
fn enhance_and_solve_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = paraqg(dir.path(), TINY, &["enhance"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    let norms = std::fs::read_to_string(out.join("enhance_norms.csv")).unwrap();
    assert_eq!(norms.lines().count(), 1 + 2 * 7);
    let snap = Snapshot::load(&out.join("X_eps0.2.pqgf")).unwrap();
    assert_eq!(snap.n, 16);
    assert!((snap.time - 0.02).abs() < 1e-12);

    let o = paraqg(dir.path(), TINY, &["solve"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("solve_report.json")).unwrap()).unwrap();
    for key in ["T_star", "iterations", "residuals", "norms"] {
        assert!(report.get(key).is_some(), "{key}");
    }
    assert!(Snapshot::load(&out.join("u_4.pqgf")).is_ok());
}
