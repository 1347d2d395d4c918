use std::process::{Command, Output};

use serde_json::Value;

fn qrhc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrhc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_emits_envelope() {
    let out = qrhc(&["verify", "--ineq", "reverse-hc", "--qubits", "2", "--trials", "50", "--seed", "7", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["spec_version"], "1.0");
    assert_eq!(doc["command"], "verify");
    assert_eq!(doc["params"]["seed"], 7);
    assert_eq!(doc["params"]["ineq"], "reverse-hc");
    assert_eq!(doc["reports"].as_array().unwrap().len(), 50);
    assert_eq!(doc["summary"]["pass_count"], 50);
    assert_eq!(doc["summary"]["fail_count"], 0);
    assert!(doc.get("timestamp").is_none());
}

#[test]
fn floats_carry_seventeen_digits() {
    let out = qrhc(&["verify", "--ineq", "gross", "--trials", "1", "--no-timestamp"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lhs = text.split("\"lhs\":").nth(1).unwrap();
    let mantissa = lhs.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{lhs}");
}

#[test]
fn timestamp_present_by_default() {
    let out = qrhc(&["verify", "--ineq", "gross", "--trials", "1"]);
    assert!(json(&out)["timestamp"].is_u64());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["verify", "--ineq", "strong-reverse-holder", "--qubits", "2", "--trials", "200", "--seed", "3", "--no-timestamp"];
    let a = qrhc(&args);
    let b = qrhc(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = qrhc(&["verify", "--ineq", "strong-reverse-holder", "--qubits", "2", "--trials", "200", "--seed", "4", "--no-timestamp"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn out_of_range_exponents_exit_two() {
    let out = qrhc(&["verify", "--ineq", "reverse-hc", "--p", "2", "--q", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("reverse-hc"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(qrhc(&["verify", "--ineq", "nonsense"]).status.code(), Some(2));
    assert_eq!(qrhc(&["search", "--ineq", "reverse-hc", "--p", "1", "--q", "0.5", "--gamma-grid", "1:0:3"]).status.code(), Some(2));
    assert_eq!(qrhc(&["search", "--ineq", "gross", "--p", "1", "--q", "0.5", "--gamma-grid", "0:1:3"]).status.code(), Some(2));
    assert_eq!(qrhc(&[]).status.code(), Some(2));
    assert_eq!(qrhc(&["--help"]).status.code(), Some(0));
}

#[test]
fn violated_bound_exits_one() {
    // The p-LSI check with an asserted constant far below the true one.
    let out = qrhc(&["verify", "--ineq", "plsi", "--alpha", "0.05", "--trials", "50", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["summary"]["fail_count"].as_u64().unwrap() > 0);
}

#[test]
fn gamma_beyond_hypothesis_is_a_contract_error() {
    let out = qrhc(&["verify", "--ineq", "reverse-hc", "--p", "0.5", "--q", "-0.5", "--gamma", "0.99", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nicd_csv_matches_classical_majority() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let out = qrhc(&[
        "nicd", "--basis", "product", "--qubits", "3", "--k", "8", "--gamma", "0.6", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["basis_id", "M_id", "n", "k", "gamma", "p_all_M", "p_all_notM"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    let p: f64 = rows[0][5].parse().unwrap();
    let classical = qrhc::cube::majority_nicd(3, 8, 0.6).unwrap();
    assert!((p - classical).abs() < 1e-12, "{p} vs {classical}");
}

#[test]
fn nicd_json_has_rows_and_envelope() {
    let out = qrhc(&["nicd", "--basis", "ghz", "--qubits", "2", "--k", "1,2,4", "--gamma", "0.5", "--c", "1", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!((rows[0]["p_all_M"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(rows.iter().all(|r| r["envelope"].is_f64()));
}

#[test]
fn search_flags_only_outside_violations() {
    let out = qrhc(&[
        "search", "--ineq", "reverse-hc", "--p", "1", "--q", "0.5", "--gamma-grid", "0:1:2", "--budget", "400",
        "--no-timestamp",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["inside_violations"], 0);
    assert!((doc["first_violation"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    let profile = doc["profile"].as_array().unwrap();
    assert_eq!(profile[0]["in_hypothesis"], true);
    assert_eq!(profile[1]["pass"], false);
    assert!(doc["reports"][1]["witness"].is_object());
}

#[test]
fn lsi_mix_and_derivative_pass() {
    for args in [
        &["lsi", "--qubits", "1", "--restarts", "4", "--no-timestamp"][..],
        &["mix", "--qubits", "2", "--sigma", "0.5", "--alpha", "1", "--gamma", "0.3", "--trials", "30", "--no-timestamp"],
        &["derivative", "--qubits", "1", "--trials", "20", "--no-timestamp"],
    ] {
        let out = qrhc(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["summary"]["fail_count"], 0, "{args:?}");
    }
}

#[test]
fn max_dim_env_caps_dimension() {
    let out = Command::new(env!("CARGO_BIN_EXE_qrhc"))
        .args(["verify", "--ineq", "reverse-hc", "--qubits", "3", "--trials", "2"])
        .env("QRHC_MAX_DIM", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_reports_for_campaigns() {
    let out = qrhc(&["verify", "--ineq", "expansivity", "--trials", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "inequality_id,lhs,rhs,slack,tol,pass,params");
    assert_eq!(lines.count(), 3);
}
