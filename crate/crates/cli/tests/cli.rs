//! End-to-end tests of the `heatrate` binary: exit codes, report and CSV
//! shape, and the determinism guarantees.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const LSO_UNIT: &str =
    r#"{"kind":"lso","lambda":1.0,"tau":1.0,"mu":1.0,"nu":1.0,"kappa":1.0,"rho_cv":1.0,"theta_ref":300.0}"#;

fn heatrate(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatrate"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn heatrate_env(dir: &Path, args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatrate"))
        .current_dir(dir)
        .env(key, val)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_model(dir: &Path, name: &str, json: &str) {
    fs::write(dir.join(name), json).unwrap();
}

fn lso(lambda: f64, tau: f64, mu: f64, nu: f64, kappa: f64) -> String {
    format!(
        r#"{{"kind":"lso","lambda":{lambda},"tau":{tau},"mu":{mu},"nu":{nu},"kappa":{kappa},"rho_cv":1.0,"theta_ref":300.0}}"#
    )
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn out(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn err(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&out(o)).expect("stdout is a JSON report")
}

#[test]
fn consistency_item1_reports_psd_true() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", LSO_UNIT);
    let o = heatrate(dir.path(), &["consistency", "--model", "m.json", "--out", "r"]);
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    let doc = json(&o);
    let matched: Vec<u64> = doc["classification"]["matched_items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert!(matched.contains(&1), "matched {matched:?}");
    let psd = doc["psd"].as_array().unwrap();
    assert!(!psd.is_empty());
    for entry in psd {
        assert_eq!(entry["psd"], Value::Bool(true), "{entry}");
    }
    // the report file is the same bytes that went to stdout
    let file = fs::read_to_string(dir.path().join("r/consistency.json")).unwrap();
    assert_eq!(file, out(&o));
}

#[test]
fn consistency_negative_mu_is_infeasible() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", &lso(1.0, 1.0, -1.0, 1.0, 1.0));
    let o = heatrate(dir.path(), &["consistency", "--model", "m.json", "--out", "r"]);
    assert_eq!(code(&o), 3, "stderr: {}", err(&o));
    assert!(err(&o).contains("infeasible"));
    let doc = json(&o);
    assert_eq!(doc["classification"]["infeasible"], Value::Bool(true));
    // the search certificate records how close the failed search got
    assert!(doc["classification"]["search_best_objective"].is_string());
}

#[test]
fn consistency_zero_lambda_hints_reduction() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", &lso(0.0, 1.0, 1.0, 1.0, 1.0));
    let o = heatrate(dir.path(), &["consistency", "--model", "m.json", "--out", "r"]);
    assert_eq!(code(&o), 2);
    assert!(err(&o).contains("jeffreys"), "stderr: {}", err(&o));
}

#[test]
fn consistency_reduced_model_uses_parameter_verdict() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "ok.json", r#"{"kind":"mcv","tau":0.8,"kappa":2.5}"#);
    let o = heatrate(dir.path(), &["consistency", "--model", "ok.json", "--out", "r"]);
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    assert_eq!(json(&o)["parameter_consistency"]["status"], "Consistent");

    write_model(dir.path(), "bad.json", r#"{"kind":"mcv","tau":0.8,"kappa":-2.5}"#);
    let o = heatrate(dir.path(), &["consistency", "--model", "bad.json", "--out", "r2"]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["parameter_consistency"]["status"], "Inconsistent");
}

#[test]
fn stability_unit_params_all_modes_stable() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", LSO_UNIT);
    let o = heatrate(
        dir.path(),
        &["stability", "--model", "m.json", "--modes", "10", "--out", "r"],
    );
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    let doc = json(&o);
    assert_eq!(doc["modes"].as_array().unwrap().len(), 10);
    for m in doc["modes"].as_array().unwrap() {
        assert_eq!(m["verdict"], "stable", "{m}");
    }
    assert_eq!(doc["mu_region"]["hi"], 4.0);
    assert_eq!(doc["parameter_verdict"]["pass"], Value::Bool(true));
    let csv = fs::read_to_string(dir.path().join("r/stability_modes.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,Lambda,verdict,max_re_root");
    assert_eq!(lines.len(), 11);
    for row in &lines[1..] {
        assert!(row.contains(",stable,"), "{row}");
    }
}

#[test]
fn stability_tuned_mu_marks_one_marginal_mode() {
    let dir = TempDir::new().unwrap();
    // mu tuned so the damping product vanishes exactly at mode 3
    // (Lambda = 9): the other modes sit outside the violating window.
    write_model(
        dir.path(),
        "m.json",
        &lso(1.0, 1.0, 4.515625 / 9.0, 0.125, 0.125),
    );
    let o = heatrate(
        dir.path(),
        &["stability", "--model", "m.json", "--modes", "10", "--out", "r"],
    );
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    let doc = json(&o);
    for m in doc["modes"].as_array().unwrap() {
        let expect = if m["n"] == 3 { "marginal" } else { "stable" };
        assert_eq!(m["verdict"], expect, "{m}");
    }
    // the all-modes parameter test correctly refuses this mu
    assert_eq!(doc["parameter_verdict"]["pass"], Value::Bool(false));
}

#[test]
fn stability_negative_kappa_is_a_regime_failure() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", &lso(1.0, 1.0, 1.0, 1.0, -1.0));
    let o = heatrate(dir.path(), &["stability", "--model", "m.json", "--out", "r"]);
    assert_eq!(code(&o), 3);
    let doc = json(&o);
    assert!(doc["mu_region_error"].is_string());
    let conds = doc["parameter_verdict"]["conditions"].as_array().unwrap();
    let kappa_check = conds.iter().find(|c| c["name"] == "kappa >= 0").unwrap();
    assert_eq!(kappa_check["satisfied"], Value::Bool(false));
}

#[test]
fn roots_table_pads_models_with_fewer_roots() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", r#"{"kind":"fourier","kappa":1.7}"#);
    let o = heatrate(
        dir.path(),
        &["roots", "--model", "m.json", "--modes", "3", "--out", "r"],
    );
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    let csv = fs::read_to_string(dir.path().join("r/roots.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,Lambda,re_w1,im_w1,re_w2,im_w2,re_w3,im_w3");
    assert_eq!(lines.len(), 4);
    for (i, row) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 8, "{row}");
        let n = (i + 1) as f64;
        let re: f64 = fields[2].parse().unwrap();
        assert!((re + 1.7 * n * n).abs() < 1e-12, "mode {n}: {re}");
        // first-order law: one real root, the rest padded empty
        assert_eq!(&fields[4..], &["", "", "", ""]);
    }
}

#[test]
fn simulate_writes_the_field_grid() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", r#"{"kind":"mcv","tau":0.8,"kappa":2.5}"#);
    let o = heatrate(
        dir.path(),
        &[
            "simulate", "--model", "m.json", "--modes", "4", "--grid", "16", "--horizon",
            "0.5", "--out", "r",
        ],
    );
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    let doc = json(&o);
    assert_eq!(doc["times"], 17);
    let csv = fs::read_to_string(dir.path().join("r/field.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,X,theta");
    assert_eq!(lines.len(), 1 + 17 * 17);
    // t = 0 at the midpoint reproduces the sine initial profile
    let mid = lines[1 + 8].split(',').collect::<Vec<_>>();
    let theta0: f64 = mid[2].parse().unwrap();
    assert!((theta0 - 1.0).abs() < 1e-8, "{theta0}");
    for row in &lines[1..] {
        let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!(v.is_finite());
    }
}

#[test]
fn simulate_refuses_unstable_parameters() {
    let dir = TempDir::new().unwrap();
    // mu = 5 exceeds the all-modes bound 4; mode 1 grows
    write_model(dir.path(), "m.json", &lso(1.0, 1.0, 5.0, 1.0, 1.0));
    let o = heatrate(dir.path(), &["simulate", "--model", "m.json", "--out", "r"]);
    assert_eq!(code(&o), 3);
    assert!(err(&o).contains("unstable"), "stderr: {}", err(&o));
}

#[test]
fn simulate_rejects_a_grid_too_coarse_for_the_modes() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", r#"{"kind":"mcv","tau":0.8,"kappa":2.5}"#);
    let o = heatrate(
        dir.path(),
        &["simulate", "--model", "m.json", "--modes", "20", "--grid", "16", "--out", "r"],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_mu_axis_flips_at_the_bound() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", LSO_UNIT);
    let o = heatrate(
        dir.path(),
        &["sweep", "--model", "m.json", "--sweep", "mu:0:5:6", "--out", "r"],
    );
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    let csv = fs::read_to_string(dir.path().join("r/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "mu,items,conditional,infeasible,stable,regime,mu_lo,mu_hi"
    );
    let stable: Vec<&str> = lines[1..]
        .iter()
        .map(|r| r.split(',').nth(4).unwrap())
        .collect();
    // bound is strict: mu = 4 already fails
    assert_eq!(stable, ["true", "true", "true", "true", "false", "false"]);
}

#[test]
fn sweep_nu_axis_with_kappa_zero_flips_at_the_linear_bound() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", &lso(1.0, 1.0, 1.0, 1.0, 0.0));
    let o = heatrate(
        dir.path(),
        &["sweep", "--model", "m.json", "--sweep", "nu:0:2:5", "--out", "r"],
    );
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    let csv = fs::read_to_string(dir.path().join("r/sweep.csv")).unwrap();
    let stable: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|r| r.split(',').nth(4).unwrap())
        .collect();
    // lambda*mu <= tau^2*nu is inclusive: the flip lands exactly on nu = 1
    assert_eq!(stable, ["false", "false", "true", "true", "true"]);
}

#[test]
fn sweep_two_axes_emit_rows_in_row_major_order() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", LSO_UNIT);
    let o = heatrate(
        dir.path(),
        &[
            "sweep", "--model", "m.json", "--sweep", "mu:0:1:2", "--sweep", "nu:0:2:3",
            "--out", "r",
        ],
    );
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    let csv = fs::read_to_string(dir.path().join("r/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("mu,nu,"));
    assert_eq!(lines.len(), 7);
    let firsts: Vec<f64> = lines[1..]
        .iter()
        .map(|r| r.split(',').next().unwrap().parse().unwrap())
        .collect();
    let seconds: Vec<f64> = lines[1..]
        .iter()
        .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(firsts, [0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    assert_eq!(seconds, [0.0, 1.0, 2.0, 0.0, 1.0, 2.0]);
}

#[test]
fn sweep_rejects_bad_axis_specs() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", LSO_UNIT);
    for args in [
        vec!["sweep", "--model", "m.json", "--out", "r"],
        vec!["sweep", "--model", "m.json", "--sweep", "mu:0:5:1", "--out", "r"],
        vec!["sweep", "--model", "m.json", "--sweep", "bogus:0:5:3", "--out", "r"],
        vec!["sweep", "--model", "m.json", "--sweep", "mu:0:5", "--out", "r"],
        vec![
            "sweep", "--model", "m.json", "--sweep", "mu:0:1:2", "--sweep", "nu:0:1:2",
            "--sweep", "kappa:0:1:2", "--out", "r",
        ],
    ] {
        let o = heatrate(dir.path(), &args);
        assert_eq!(code(&o), 2, "args {args:?}: {}", err(&o));
    }
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", LSO_UNIT);
    let args = [
        "sweep", "--model", "m.json", "--sweep", "mu:0:5:12", "--sweep", "nu:0:3:7",
        "--out", "r",
    ];
    let one = heatrate_env(dir.path(), &args, "HEATRATE_THREADS", "1");
    assert_eq!(code(&one), 0);
    let csv_one = fs::read(dir.path().join("r/sweep.csv")).unwrap();
    let four = heatrate_env(dir.path(), &args, "HEATRATE_THREADS", "4");
    assert_eq!(code(&four), 0);
    let csv_four = fs::read(dir.path().join("r/sweep.csv")).unwrap();
    assert_eq!(csv_one, csv_four);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn validate_reports_per_check_lines_and_fails_on_intersection() {
    let dir = TempDir::new().unwrap();
    let o = heatrate(dir.path(), &["validate", "--out", "r"]);
    assert_eq!(code(&o), 1, "stderr: {}", err(&o));
    let text = out(&o);
    assert!(text.contains("check classifier_vs_search: pass"), "{text}");
    assert!(text.contains("check verdicts_vs_roots: pass"), "{text}");
    assert!(text.contains("check spectral_vs_fd: pass"), "{text}");
    // the sampled intersection finds a stable zero-mu family on row 7
    // that the fixed admissibility flags exclude
    assert!(
        text.contains("check admissibility_intersection: FAIL"),
        "{text}"
    );
    let doc: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r/validate.json")).unwrap())
            .unwrap();
    assert_eq!(doc["pass"], Value::Bool(false));
}

#[test]
fn validate_fault_hook_trips_the_classifier_check() {
    let dir = TempDir::new().unwrap();
    let o = heatrate(dir.path(), &["validate", "--fault", "--out", "r"]);
    assert_eq!(code(&o), 1);
    assert!(
        out(&o).contains("check classifier_vs_search: FAIL"),
        "{}",
        out(&o)
    );
}

#[test]
fn validate_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let args = ["validate", "--seed", "7", "--out", "r"];
    let a = heatrate(dir.path(), &args);
    let file_a = fs::read(dir.path().join("r/validate.json")).unwrap();
    let b = heatrate(dir.path(), &args);
    let file_b = fs::read(dir.path().join("r/validate.json")).unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(file_a, file_b);
}

#[test]
fn missing_model_or_unknown_flag_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = heatrate(dir.path(), &["consistency", "--out", "r"]);
    assert_eq!(code(&o), 2);
    assert!(err(&o).contains("--model"));
    let o = heatrate(dir.path(), &["consistency", "--bogus"]);
    assert_eq!(code(&o), 2);
    write_model(dir.path(), "m.json", LSO_UNIT);
    let o = heatrate_env(
        dir.path(),
        &["sweep", "--model", "m.json", "--sweep", "mu:0:1:2", "--out", "r"],
        "HEATRATE_THREADS",
        "abc",
    );
    assert_eq!(code(&o), 2);
}
