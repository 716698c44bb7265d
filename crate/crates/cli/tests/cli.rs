use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn plad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plad"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn plad_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plad"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, extra: &str) -> String {
    let out = dir.join("out");
    let text = format!(
        r#"{{
            "d": 1, "p": 1.4, "alpha": 0.8, "lambda": 0.5,
            "grid": {{"n": 64, "half_width": 8.0}},
            "initial": {{"kind": "gaussian", "center": [0], "sigma": 1.0, "mass": 1.0}},
            "t_end": 0.001, "diag_every": 200, "snapshot_times": [0.0, 0.0005],
            {extra}
            "output": {{"dir": {out:?}}}
        }}"#
    );
    let path = dir.join("run.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn write_2d_config(dir: &Path) -> String {
    let text = format!(
        r#"{{
            "d": 2, "p": "5/3", "alpha": 1, "lambda": 1,
            "grid": {{"n": 24, "half_width": 6.0}},
            "initial": {{"kind": "gaussian", "center": [0, 0], "sigma": 1.0, "mass": 1.0}},
            "t_end": 0.002, "diag_every": 100,
            "output": {{"dir": {:?}}}
        }}"#,
        dir.join("out")
    );
    let path = dir.join("sweep.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn classify_fair_competition_point() {
    let o = plad(&["classify", "--d", "2", "--p", "1.6666667", "--alpha", "1", "--lambda", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["regime"], "FairCompetition");
    assert_eq!(v["p"], "5/3");
    assert_eq!(v["alpha_p"], "1");
    assert_eq!(v["moment_window"][1], "1");
    let m_c = v["constants"]["m_c"].as_f64().unwrap();
    assert!((m_c - 2.683672169669775).abs() < 1e-12);
}

#[test]
fn classify_rejects_p_outside_window() {
    let o = plad(&["classify", "--d", "2", "--p", "1.2", "--alpha", "1", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p out of range (4/3, 2)"));
}

#[test]
fn classify_lambda_scaling() {
    let mc = |lambda: &str| {
        let o = plad(&["classify", "--d", "2", "--p", "1.8", "--alpha", "0.5", "--lambda", lambda]);
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["regime"], "DiffusionDominated");
        v["constants"]["m_c"].as_f64().unwrap()
    };
    let ratio = mc("2") / mc("1");
    assert!((ratio - 2f64.powf(-1.0 / 1.2)).abs() < 1e-14);
}

#[test]
fn classify_one_dimension_has_no_critical_mass() {
    let o = plad(&["classify", "--d", "1", "--p", "7/5", "--alpha", "4/5", "--lambda", "1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["constants"]["unavailable"].is_string());
    assert!(v["p_star"].is_null());
}

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = plad(&["simulate", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["status"], "ReachedTEnd");
    assert!(summary["mass_drift"].as_f64().unwrap() < 1e-12);

    let out = dir.path().join("out");
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("t,dt,mass,min,max,entropy"));
    let hash = summary["config_hash"].as_str().unwrap();
    assert_eq!(*lines.last().unwrap(), format!("# config-hash: {hash}"));
    let times: Vec<f64> = lines[1..lines.len() - 1]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(times.len() >= 3);
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(*times.last().unwrap(), 0.001);

    let snaps = summary["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 2);
    let file = fs::File::open(out.join(snaps[1]["file"].as_str().unwrap())).unwrap();
    let field = plad::fields::io::read_plad::<f64, _>(file).unwrap();
    assert_eq!(field.grid().n(), 64);
    assert!(out.join("summary.json").exists());
}

#[test]
fn simulate_reports_blow_up_indicator() {
    // ten times the critical mass concentrates; the initial peak is 10 M_c / 2π ≈ 4.27
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        r#"{{
            "d": 2, "p": "5/3", "alpha": 1, "lambda": 1,
            "grid": {{"n": 32, "half_width": 6.0}},
            "initial": {{"kind": "gaussian", "center": [0, 0], "sigma": 1.0, "mass": 1.0}},
            "mass_multiplier": 10, "rho_max": 6.0,
            "t_end": 0.2, "diag_every": 100,
            "output": {{"dir": {:?}}}
        }}"#,
        dir.path().join("out")
    );
    let cfg = dir.path().join("super.json");
    fs::write(&cfg, text).unwrap();
    let o = plad(&["simulate", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["status"], "BlowUpIndicator");
    assert!(summary["status_time"].as_f64().unwrap() < 0.2);
    assert!(summary["max_density"].as_f64().unwrap() > 6.0);
}

#[test]
fn simulate_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{ not json").unwrap();
    let o = plad(&["simulate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parse"));

    let cfg = write_config(dir.path(), r#""mystery": 1,"#);
    let o = plad(&["simulate", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mystery"));

    let o = plad(&["simulate", "/nonexistent/run.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_rows_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_2d_config(dir.path());
    let o = plad(&["sweep", &cfg, "--multipliers", "0.5,0.25"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("multiplier,mass,mass_over_critical,status"));
    assert!(lines[1].starts_with("0.5,"));
    assert!(lines[2].starts_with("0.25,"));
    assert!(lines[1].contains("ReachedTEnd"));
    assert!(lines[3].starts_with("# config-hash: "));

    let single = plad_env(&["sweep", &cfg, "--multipliers", "0.5,0.25"], "PLAD_THREADS", "1");
    assert_eq!(stdout(&single), text);
}

#[test]
fn sweep_needs_multipliers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_2d_config(dir.path());
    let o = plad(&["sweep", &cfg, "--multipliers"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty multiplier list"));
}

#[test]
fn verify_is_deterministic() {
    let a = plad(&["verify", "--suite", "gns", "--samples", "12", "--seed", "7"]);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = plad_env(&["verify", "--suite", "gns", "--samples", "12", "--seed", "7"], "PLAD_THREADS", "2");
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 14);
    assert!(text.lines().skip(1).take(12).all(|l| l.ends_with(",true")));
    assert!(stderr(&a).contains("12/12 passed"));
}

#[test]
fn verify_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("moment.csv");
    let o = plad(&["verify", "--suite", "moment", "--samples", "4", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(out).unwrap();
    assert!(text.starts_with("field_id,check,lhs,rhs,ratio,pass\n"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn verify_rejects_unknown_suite_and_bad_threads() {
    let o = plad(&["verify", "--suite", "everything"]);
    assert_eq!(o.status.code(), Some(2));
    let o = plad_env(&["verify", "--suite", "gns", "--samples", "1"], "PLAD_THREADS", "zero");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("PLAD_THREADS"));
}
