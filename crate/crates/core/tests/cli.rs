use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_linset-lab"));
    cmd.args(args).env_remove("LINSETLAB_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn compare_frobenius_powers() {
    let out = run(&["compare", "--p", "2", "--e", "1", "--n", "5", "--f", "x^q", "--g", "x^q^2", "--enumerate"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["equal"], true);
    assert_eq!(v["by_enumeration"], true);
    assert_eq!(v["verdict"], "pseudoregulus");
}

#[test]
fn club_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("club.json");
    let out = run(&["construct", "club", "--p", "2", "--n", "4", "--out", path.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let arg = format!("@{}", path.display());
    let out = run(&["show", "--p", "2", "--e", "1", "--n", "4", "--f", &arg, "--spectrum"], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "weight,count\n1,8\n2,0\n3,1\n4,0\n");
}

#[test]
fn search_is_deterministic_across_workers() {
    let a = run(&["search", "--p", "2", "--n", "3", "--quiet"], &[]);
    let b = run(&["search", "--p", "2", "--n", "3", "--quiet", "--workers", "4"], &[]);
    let c = run(&["search", "--p", "2", "--n", "3", "--quiet"], &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert_eq!(json(&a)["anomalies"].as_array().unwrap().len(), 0);
}

#[test]
fn budget_variable_limits_searches() {
    let out = run(&["search", "--p", "2", "--n", "3", "--quiet"], &[("LINSETLAB_BUDGET", "100")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
    let out = run(&["field-info", "--p", "2", "--n", "3"], &[("LINSETLAB_BUDGET", "lots")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["search", "--p", "2"], &[]).status.code(), Some(1));
    assert_eq!(run(&["nonsense"], &[]).status.code(), Some(1));
    assert_eq!(run(&["field-info", "--p", "4", "--n", "2"], &[]).status.code(), Some(1));
    assert_eq!(run(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn classify_reports_replayed_witness() {
    let out = run(&["classify", "--p", "2", "--n", "4", "--f", "x^q + [0,1,0,0]*x^q^2", "--g", "x^q^3 + [1,0,0,1]*x^q^2"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["replayed"], true);
    assert_eq!(v["verdict"]["case"], "perp_multiple");
    let out = run(&["classify", "--p", "2", "--n", "4", "--f", "x^q", "--g", "x"], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generalized_construction_with_partner() {
    let out = run(
        &["construct", "generalized", "--p", "2", "--n", "6", "--d", "3", "--inner", "x^q^2", "--f-prime", "2*x^q^3", "--partner", "perp-d"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let dir = tempfile::tempdir().unwrap();
    let (fp, gp) = (dir.path().join("f.json"), dir.path().join("g.json"));
    std::fs::write(&fp, v.to_string()).unwrap();
    std::fs::write(&gp, v["partner"]["graph"].to_string()).unwrap();
    let (fa, ga) = (format!("@{}", fp.display()), format!("@{}", gp.display()));
    let out = run(&["classify", "--p", "2", "--n", "6", "--f", &fa, "--g", &ga], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"]["case"], "generalized_perp");
}

#[test]
fn field_info_and_modulus_override() {
    let out = run(&["field-info", "--p", "2", "--n", "4", "--modulus", "1,1,0,0,1"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["modulus"], serde_json::json!([1, 1, 0, 0, 1]));
    assert_eq!(v["order"], 16);
    let out = run(&["field-info", "--p", "2", "--n", "4", "--modulus", "1,0,1,0,1"], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_search_summary_and_club_verification() {
    let out = run(&["search", "--p", "3", "--n", "2", "--quiet", "--format", "csv"], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("key,value\nscanned,81\n"));
    let out = run(&["verify", "club-uniqueness", "--p", "2", "--n", "3", "--quiet"], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["unique"], true);
}
